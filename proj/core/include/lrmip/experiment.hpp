#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "lrmip/scaling.hpp"
#include "lrmip/trajectory.hpp"

namespace lrmip {

std::string version();

// Formats a double with 17 significant digits (lossless round trip).
std::string format_double(double x);

// One configuration file fully determines a run. Keys (YAML, flat):
//   L, alpha, gamma: lists          N: int (default L/2)
//   t_burn, t_sample, dt_sample     n_traj, seed (mandatory)
//   update: eigendecomposition | householder
//   observables: [profile, half, mi_quarters, mi_far]
//   fit_window: [lo, hi]            bandwidth, gamma_c_range, nu_range, ...
//   norm_alpha, norm_L: lists       workers, output_dir, save_jumps
struct ExperimentConfig {
  std::vector<int> sizes;
  std::vector<double> alphas;
  std::vector<double> gammas;
  int N = -1;
  double t_burn = -1.0;
  double t_sample = -1.0;
  double dt_sample = 1.0;
  int n_traj = 200;
  std::optional<std::uint64_t> seed;
  MeasurementUpdate update = MeasurementUpdate::eigendecomposition;
  ObservableSelection observables;

  int fit_lo = -1;  // -1: default window [3L/8, L/2]
  int fit_hi = -1;
  CollapseOptions collapse;

  std::vector<double> norm_alphas;
  std::vector<int> norm_sizes;

  int workers = 1;
  std::string output_dir = "out";
  bool save_jumps = false;

  static ExperimentConfig from_yaml(const std::string& text);
  static ExperimentConfig from_file(const std::filesystem::path& path);

  // Throws ConfigError when a list is empty or the seed is missing.
  void validate() const;
  // Canonical text of every field that influences results (not workers or
  // output_dir), and its FNV-1a hash in hex.
  std::string canonical() const;
  std::string hash() const;
};

struct CellKey {
  int L = 0;
  double alpha = 0.0;
  double gamma = 0.0;
  std::string label() const;
};

struct CellResult {
  CellKey key;
  bool ok = false;
  std::string error;
  std::uint64_t cell_seed = 0;
  EnsembleResult ensemble;
  std::vector<JumpRecord> records;  // only with save_jumps
};

struct ResultSet {
  std::string config_hash;
  std::string code_version;
  std::vector<CellResult> cells;
  bool complete = true;  // false after an interrupted (stop_after) run

  bool all_ok() const;
};

struct RunOptions {
  int workers = -1;  // -1: take from config
  std::optional<std::filesystem::path> out_dir;
  bool resume = false;
  // Test hook: stop once this many trajectories have been persisted.
  long stop_after = -1;
};

TrajectoryConfig cell_config(const ExperimentConfig& config, const CellKey& key);
std::uint64_t cell_seed(std::uint64_t root, const CellKey& key);

// Sweeps (L, alpha, gamma), runs each ensemble and writes results.csv,
// results.json, trajectories.csv (and jumps.csv) into the output directory.
// Progress is checkpointed per trajectory to checkpoint.jsonl; with `resume`
// completed trajectories are loaded instead of recomputed.
ResultSet run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

struct ResultRow {
  int L = 0;
  double alpha = 0.0;
  double gamma = 0.0;
  std::string observable;
  double mean = 0.0;
  double std_error = 0.0;
  int n_traj = 0;
  std::string config_hash;
};

inline constexpr const char* kResultsHeader =
    "L,alpha,gamma,observable,mean,stderr,n_traj,config_hash";

std::vector<ResultRow> read_results_csv(const std::filesystem::path& path);

}  // namespace lrmip
