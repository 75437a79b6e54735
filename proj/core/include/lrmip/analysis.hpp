#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lrmip/bounds.hpp"
#include "lrmip/experiment.hpp"

namespace lrmip {

enum class AnalysisMode { crossing, bkt, powerlaw, cft };
AnalysisMode parse_analysis_mode(const std::string& name);

struct AnalysisOptions {
  std::string observable;  // empty: I_quarters (crossing, bkt), I_far (powerlaw)
  CollapseOptions collapse;
  int fit_lo = -1;
  int fit_hi = -1;
  int bootstrap_resamples = 1000;
  std::uint64_t seed = 1;
  // When set, per-panel plot data (collapse coordinates) go here.
  std::optional<std::filesystem::path> plot_dir;
};

// Fit report over the rows of one or more results.csv files.
// Throws ConfigError when `rows` is empty.
nlohmann::json analyze(const std::vector<ResultRow>& rows, AnalysisMode mode,
                       const AnalysisOptions& options = {});

// norms.csv (alpha, L, norm) and norm_fits.csv for every alpha.
std::vector<NormScalingSeries> run_norms(const std::vector<double>& alphas,
                                         const std::vector<int>& sizes,
                                         const std::filesystem::path& out_dir);

struct OracleCheckOptions {
  int n_traj = 3;
  bool inject_fault = false;  // test hook: drop every other measurement
  double tolerance = 1e-8;
};

struct OracleCheckReport {
  bool passed = false;
  int trajectories = 0;
  int total_jumps = 0;
  int samples = 0;
  double max_correlation_deviation = 0.0;
  double max_entropy_deviation = 0.0;
  double max_mutual_information_deviation = 0.0;
  double max_occupation_deviation = 0.0;
  double max_trace_defect = 0.0;
  double max_orthonormality_defect = 0.0;
  nlohmann::json to_json() const;
};

// Gaussian trajectories versus dense replays of the same jump records.
OracleCheckReport run_oracle_check(const TrajectoryConfig& config,
                                   const OracleCheckOptions& options = {});

}  // namespace lrmip
