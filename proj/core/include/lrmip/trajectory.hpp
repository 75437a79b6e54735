#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lrmip/gaussian.hpp"
#include "lrmip/model.hpp"

namespace lrmip {

struct JumpEvent {
  double time = 0.0;
  int site = 0;  // 0-based
};

struct JumpRecord {
  std::vector<JumpEvent> events;
  std::uint64_t seed = 0;
  std::uint64_t trajectory_id = 0;
};

// How the post-measurement orbitals are obtained.
//   eigendecomposition: build the L x L post-measurement correlation matrix and
//     keep its N leading eigenvectors (O(L^3) per jump).
//   householder: rotate the orbitals with one Householder reflector so that a
//     single orbital carries all weight on the measured site, then replace it
//     by e_j. Orbitals are kept in the eigenbasis of h so that free evolution
//     is a diagonal phase (O(L N) per jump).
enum class MeasurementUpdate { eigendecomposition, householder };

// Observables recorded at every sampling time.
struct ObservableSelection {
  bool profile = true;      // S_1 .. S_{L/2}
  bool half = true;         // S_half = S_{L/2}
  bool mi_quarters = true;  // only when L % 8 == 0
  bool mi_far = true;
};

struct TrajectoryConfig {
  LatticeSpec spec;
  double gamma = 1.0;
  double t_burn = -1.0;     // < 0 selects the default 2L
  double t_sample = -1.0;   // < 0 selects the default 2L
  double dt_sample = 1.0;
  std::uint64_t seed = 0;
  int n_traj = 200;
  MeasurementUpdate update = MeasurementUpdate::eigendecomposition;
  ObservableSelection observables;

  // Copy with defaults resolved; throws ConfigError when invalid.
  TrajectoryConfig resolved() const;
  std::vector<double> sampling_times() const;
};

// Waiting time -log(r)/(gamma N). Throws DomainError unless 0 < r <= 1.
double sample_jump_time(double r, double gamma, int N);

// u <- exp(-i h tau) u via the cached spectral decomposition; t += tau.
GaussianState evolve_unitary(const GaussianState& state, const SingleParticleHamiltonian& h,
                             double tau);

// Site j with probability <n_j>/N by cumulative inversion; r in [0, 1).
int select_measurement_site(double r, const GaussianState& state);

inline constexpr double kEmptySiteThreshold = 1e-12;

// Projective update c_j^dag c_j |psi> / sqrt(<n_j>) through the
// post-measurement correlation matrix and its leading eigenvectors.
GaussianState apply_measurement(const GaussianState& state, int j,
                                double eps_occ = kEmptySiteThreshold);

// Same projective update by a single Householder reflection of the orbitals.
GaussianState apply_measurement_householder(const GaussianState& state, int j,
                                            double eps_occ = kEmptySiteThreshold);

// Observables of one state, keyed by name (S_<l>, S_half, I_quarters, I_far).
std::map<std::string, double> measure_observables(const GaussianState& state,
                                                  const ObservableSelection& which);

struct Sample {
  double t = 0.0;
  std::map<std::string, double> values;
  // Only filled when TrajectoryOptions::keep_states is set.
  GaussianState state;
};

struct TrajectoryOptions {
  bool keep_samples = false;
  bool keep_states = false;
  // Test hook for replays: every second recorded measurement is skipped.
  bool drop_alternate_measurements = false;
};

struct TrajectoryResult {
  JumpRecord record;
  std::vector<Sample> samples;          // empty unless keep_samples
  std::map<std::string, double> means;  // time averages over sampling times
  double max_trace_defect = 0.0;        // max |tr(D) - N| over samples
  double max_orthonormality_defect = 0.0;
};

// Seed of trajectory `trajectory_id` under the configuration root seed.
std::uint64_t trajectory_seed(const TrajectoryConfig& config, std::uint64_t trajectory_id);

TrajectoryResult run_trajectory(const TrajectoryConfig& config, const SingleParticleHamiltonian& h,
                                std::uint64_t trajectory_id, const TrajectoryOptions& options = {});

// Deterministic re-run of a given jump record (no random numbers drawn).
// Throws ConfigError when the record does not fit the configuration.
TrajectoryResult replay_trajectory(const TrajectoryConfig& config,
                                   const SingleParticleHamiltonian& h, const JumpRecord& record,
                                   const TrajectoryOptions& options = {});

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
};

struct EnsembleResult {
  int n_traj = 0;
  std::map<std::string, Estimate> estimates;
  // Per-trajectory time averages, ordered by trajectory id.
  std::map<std::string, std::vector<double>> per_trajectory;
  std::vector<std::uint64_t> seeds;
  double max_trace_defect = 0.0;
  double max_orthonormality_defect = 0.0;
};

// Mean and standard error over trajectory-level time averages.
Estimate mean_and_stderr(const std::vector<double>& values);

// Reduces per-trajectory results in trajectory-id order.
EnsembleResult reduce_ensemble(const std::vector<TrajectoryResult>& trajectories);

// Runs trajectories 0..n_traj-1 on `workers` threads (0 = hardware concurrency).
// The result does not depend on the worker count.
EnsembleResult run_ensemble(const TrajectoryConfig& config, const SingleParticleHamiltonian& h,
                            int workers = 1);

}  // namespace lrmip
