#include "lrmip/trajectory.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <complex>
#include <exception>
#include <memory>
#include <numeric>
#include <string>
#include <thread>

#include "lrmip/errors.hpp"
#include "lrmip/observables.hpp"
#include "lrmip/rng.hpp"

namespace lrmip {

using cdouble = std::complex<double>;

TrajectoryConfig TrajectoryConfig::resolved() const {
  TrajectoryConfig out = *this;
  try {
    out.spec.validate();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw ConfigError("gamma must be positive");
  if (out.t_burn < 0.0) out.t_burn = 2.0 * spec.L;
  if (out.t_sample < 0.0) out.t_sample = 2.0 * spec.L;
  if (!(dt_sample > 0.0)) throw ConfigError("dt_sample must be positive");
  if (n_traj < 1) throw ConfigError("n_traj must be positive");
  return out;
}

std::vector<double> TrajectoryConfig::sampling_times() const {
  const TrajectoryConfig r = resolved();
  const auto count = static_cast<long>(std::floor(r.t_sample / r.dt_sample + 1e-9));
  std::vector<double> times;
  times.reserve(static_cast<std::size_t>(count + 1));
  for (long k = 0; k <= count; ++k) times.push_back(r.t_burn + static_cast<double>(k) * r.dt_sample);
  return times;
}

double sample_jump_time(double r, double gamma, int N) {
  if (!(r > 0.0) || r > 1.0) throw DomainError("jump-time variate must lie in (0, 1]");
  if (!(gamma > 0.0) || N < 1) throw DomainError("jump rate must be positive");
  return -std::log(r) / (gamma * static_cast<double>(N));
}

GaussianState evolve_unitary(const GaussianState& state, const SingleParticleHamiltonian& h,
                             double tau) {
  if (tau < 0.0) throw DomainError("evolution time must be non-negative");
  const Eigen::MatrixXd& V = h.modes();
  Eigen::MatrixXcd w = V.transpose() * state.u;
  for (Eigen::Index k = 0; k < w.rows(); ++k) {
    w.row(k) *= std::polar(1.0, -h.energies()(k) * tau);
  }
  GaussianState out;
  out.u = V * w;
  out.t = state.t + tau;
  return out;
}

namespace {

int invert_cumulative(const Eigen::VectorXd& weights, double r) {
  const double total = weights.sum();
  if (!(total > 0.0)) throw Error("no occupied site to measure");
  const double target = r * total;
  double cumulative = 0.0;
  int last_occupied = -1;
  for (Eigen::Index j = 0; j < weights.size(); ++j) {
    if (weights(j) <= 0.0) continue;
    cumulative += weights(j);
    last_occupied = static_cast<int>(j);
    if (cumulative > target) return static_cast<int>(j);
  }
  return last_occupied;
}

// Orbitals rotated by one Householder reflector so that only the first column
// has weight on the measured site; that column is then replaced by `site_vec`
// (the unit vector of site j in the chosen representation) and the residual
// overlap of the other columns with it is projected out.
void householder_measure(Eigen::MatrixXcd& w, const Eigen::RowVectorXcd& a,
                         const Eigen::VectorXcd& site_vec) {
  const Eigen::Index n = w.cols();
  if (n > 1) {
    const double norm_a = a.norm();
    Eigen::VectorXcd v = a.adjoint() / norm_a;
    const double phase = std::arg(v(0));
    v(0) += std::polar(1.0, phase);
    const double vv = v.squaredNorm();
    const Eigen::VectorXcd wv = w * v;
    w.noalias() -= (2.0 / vv) * wv * v.adjoint();
  }
  w.col(0) = site_vec;
  if (n > 1) {
    auto rest = w.rightCols(n - 1);
    const Eigen::RowVectorXcd overlap = site_vec.adjoint() * rest;
    rest.noalias() -= site_vec * overlap;
  }
}

}  // namespace

int select_measurement_site(double r, const GaussianState& state) {
  if (!(r >= 0.0) || r >= 1.0) throw DomainError("site variate must lie in [0, 1)");
  return invert_cumulative(state.occupations(), r);
}

GaussianState apply_measurement(const GaussianState& state, int j, double eps_occ) {
  const int L = state.sites();
  const int N = state.particles();
  if (j < 0 || j >= L) throw DomainError("site index out of range");
  const Eigen::MatrixXcd P = state.u * state.u.adjoint();
  const double occ = P(j, j).real();
  if (!(occ > eps_occ)) {
    throw EmptySiteError("measurement of site " + std::to_string(j) + " with occupation " +
                         std::to_string(occ));
  }
  // Wick update on the projector P = conj(D); the formula is invariant under
  // complex conjugation.
  Eigen::MatrixXcd Pn = P - (P.col(j) * P.row(j)) / P(j, j);
  Pn.row(j).setZero();
  Pn.col(j).setZero();
  Pn(j, j) = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(Pn);
  if (solver.info() != Eigen::Success) throw NumericalError("post-measurement eigensolver failed");
  GaussianState out;
  out.t = state.t;
  out.u = solver.eigenvectors().rightCols(N);
  return out;
}

GaussianState apply_measurement_householder(const GaussianState& state, int j, double eps_occ) {
  const int L = state.sites();
  if (j < 0 || j >= L) throw DomainError("site index out of range");
  const Eigen::RowVectorXcd a = state.u.row(j);
  if (!(a.squaredNorm() > eps_occ)) {
    throw EmptySiteError("measurement of site " + std::to_string(j) + " with occupation " +
                         std::to_string(a.squaredNorm()));
  }
  GaussianState out = state;
  householder_measure(out.u, a, Eigen::VectorXcd::Unit(L, j));
  return out;
}

std::map<std::string, double> measure_observables(const GaussianState& state,
                                                  const ObservableSelection& which) {
  std::map<std::string, double> values;
  const int L = state.sites();
  if (which.profile) {
    const EntanglementProfile profile = entanglement_profile(state);
    for (int ell = 1; ell <= L / 2; ++ell) values["S_" + std::to_string(ell)] = profile.at(ell);
    if (which.half) values["S_half"] = profile.at(L / 2);
  } else if (which.half) {
    std::vector<int> half(static_cast<std::size_t>(L / 2));
    std::iota(half.begin(), half.end(), 0);
    values["S_half"] = region_entropy(state, half);
  }
  if (which.mi_quarters && L % 8 == 0) values["I_quarters"] = mutual_information_quarters(state);
  if (which.mi_far) values["I_far"] = mutual_information_far_sites(state);
  return values;
}

std::uint64_t trajectory_seed(const TrajectoryConfig& config, std::uint64_t trajectory_id) {
  return stream_seed(config.seed, trajectory_id);
}

namespace {

class Propagator {
 public:
  virtual ~Propagator() = default;
  virtual void advance(double tau) = 0;
  virtual int choose_site(double r) = 0;
  virtual void measure(int j) = 0;
  virtual GaussianState snapshot() = 0;
};

class RealSpacePropagator final : public Propagator {
 public:
  RealSpacePropagator(GaussianState initial, const SingleParticleHamiltonian& h)
      : state_(std::move(initial)), h_(h) {}

  void advance(double tau) override { state_ = evolve_unitary(state_, h_, tau); }
  int choose_site(double r) override { return select_measurement_site(r, state_); }
  void measure(int j) override { state_ = apply_measurement(state_, j); }
  GaussianState snapshot() override { return state_; }

 private:
  GaussianState state_;
  const SingleParticleHamiltonian& h_;
};

// Orbitals stored as w = V^T u in the eigenbasis of h.
constexpr double kReorthogonalizeThreshold = 1e-13;

class EigenbasisPropagator final : public Propagator {
 public:
  EigenbasisPropagator(const GaussianState& initial, const SingleParticleHamiltonian& h)
      : V_(h.modes()), E_(h.energies()), t_(initial.t), t0_(initial.t) {
    w_ = V_.transpose() * initial.u;
  }

  // Orbitals are stored in the interaction frame, w = exp(-i E (t - t0)) w_,
  // so free evolution only advances the clock.
  void advance(double tau) override { t_ += tau; }

  // Mixture sampling: orbital m uniformly, then site j with weight |u(j,m)|^2.
  // The marginal of j is <n_j>/N.
  int choose_site(double r) override {
    const int n = static_cast<int>(w_.cols());
    const double scaled = r * static_cast<double>(n);
    const int m = std::min(static_cast<int>(scaled), n - 1);
    const double r2 = std::clamp(scaled - static_cast<double>(m), 0.0, std::nextafter(1.0, 0.0));
    const Eigen::VectorXcd column = V_ * phases().cwiseProduct(w_.col(m));
    return invert_cumulative(column.cwiseAbs2(), r2);
  }

  void measure(int j) override {
    const Eigen::VectorXcd& phi = phases();
    const Eigen::VectorXcd site_vec = phi.conjugate().cwiseProduct(V_.row(j).transpose());
    const Eigen::RowVectorXcd a = site_vec.adjoint() * w_;
    if (!(a.squaredNorm() > kEmptySiteThreshold)) {
      throw EmptySiteError("measurement of site " + std::to_string(j) + " with occupation " +
                           std::to_string(a.squaredNorm()));
    }
    householder_measure(w_, a, site_vec);
  }

  GaussianState snapshot() override {
    // Rounding drift is removed here rather than after every jump, and only
    // once it is measurable.
    const Eigen::Index n = w_.cols();
    const double drift = (w_.adjoint() * w_ - Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff();
    if (drift > kReorthogonalizeThreshold) {
      Eigen::HouseholderQR<Eigen::MatrixXcd> qr(w_);
      Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(w_.rows(), n);
      q.applyOnTheLeft(qr.householderQ());
      // Keep each column's phase: Q R with R's diagonal made positive.
      const Eigen::MatrixXcd& r = qr.matrixQR();
      for (Eigen::Index k = 0; k < n; ++k) {
        const cdouble d = r(k, k);
        if (std::abs(d) > 0.0) q.col(k) *= d / std::abs(d);
      }
      w_ = q;
    }
    GaussianState out;
    out.u = V_ * (phases().asDiagonal() * w_);
    out.t = t_;
    return out;
  }

 private:
  const Eigen::VectorXcd& phases() {
    if (phase_time_ != t_ || phi_.size() == 0) {
      phi_.resize(E_.size());
      for (Eigen::Index k = 0; k < E_.size(); ++k) phi_(k) = std::polar(1.0, -E_(k) * (t_ - t0_));
      phase_time_ = t_;
    }
    return phi_;
  }

  const Eigen::MatrixXd& V_;
  const Eigen::VectorXd& E_;
  Eigen::MatrixXcd w_;
  double t_;
  double t0_;
  Eigen::VectorXcd phi_;
  double phase_time_ = 0.0;
};

std::unique_ptr<Propagator> make_propagator(const TrajectoryConfig& config,
                                            const SingleParticleHamiltonian& h) {
  if (h.sites() != config.spec.L) throw ConfigError("Hamiltonian size does not match lattice");
  GaussianState initial = neel_state(config.spec);
  if (config.update == MeasurementUpdate::householder) {
    return std::make_unique<EigenbasisPropagator>(initial, h);
  }
  return std::make_unique<RealSpacePropagator>(std::move(initial), h);
}

void record_sample(TrajectoryResult& result, GaussianState state, const TrajectoryConfig& config,
                   const TrajectoryOptions& options, std::map<std::string, double>& sums) {
  const double trace_defect = std::abs(state.occupations().sum() - config.spec.N);
  result.max_trace_defect = std::max(result.max_trace_defect, trace_defect);
  result.max_orthonormality_defect =
      std::max(result.max_orthonormality_defect, state.orthonormality_defect());
  std::map<std::string, double> values = measure_observables(state, config.observables);
  for (const auto& [name, value] : values) sums[name] += value;
  if (options.keep_samples || options.keep_states) {
    Sample sample;
    sample.t = state.t;
    sample.values = std::move(values);
    if (options.keep_states) sample.state = std::move(state);
    result.samples.push_back(std::move(sample));
  }
}

// Event loop shared by fresh runs (rng != nullptr) and replays.
TrajectoryResult drive(const TrajectoryConfig& config, Propagator& propagator, RandomStream* rng,
                       const JumpRecord* replay, const TrajectoryOptions& options) {
  const std::vector<double> times = config.sampling_times();
  TrajectoryResult result;
  std::map<std::string, double> sums;

  double t = 0.0;
  std::size_t next_event = 0;
  auto draw_jump = [&]() {
    double next = t;
    while (!(next > t)) {
      next = t + sample_jump_time(rng->uniform_open_closed(), config.gamma, config.spec.N);
    }
    return next;
  };
  double next_jump = rng ? draw_jump()
                         : (replay->events.empty() ? INFINITY : replay->events.front().time);

  for (std::size_t k = 0; k < times.size();) {
    const double s = times[k];
    if (next_jump < s) {
      propagator.advance(next_jump - t);
      t = next_jump;
      int site = 0;
      bool apply = true;
      if (rng) {
        site = propagator.choose_site(rng->uniform());
      } else {
        site = replay->events[next_event].site;
        apply = !(options.drop_alternate_measurements && next_event % 2 == 1);
      }
      if (apply) propagator.measure(site);
      result.record.events.push_back({t, site});
      if (rng) {
        next_jump = draw_jump();
      } else {
        ++next_event;
        next_jump = next_event < replay->events.size() ? replay->events[next_event].time : INFINITY;
      }
    } else {
      propagator.advance(s - t);
      t = s;
      record_sample(result, propagator.snapshot(), config, options, sums);
      ++k;
    }
  }
  if (replay && next_event != replay->events.size()) {
    throw ConfigError("jump record extends beyond the configured run length");
  }

  const double count = static_cast<double>(times.size());
  for (const auto& [name, total] : sums) result.means[name] = total / count;
  result.means["jumps"] = static_cast<double>(result.record.events.size());
  return result;
}

}  // namespace

TrajectoryResult run_trajectory(const TrajectoryConfig& config, const SingleParticleHamiltonian& h,
                                std::uint64_t trajectory_id, const TrajectoryOptions& options) {
  const TrajectoryConfig resolved = config.resolved();
  auto propagator = make_propagator(resolved, h);
  const std::uint64_t seed = trajectory_seed(resolved, trajectory_id);
  RandomStream rng(seed);
  TrajectoryResult result = drive(resolved, *propagator, &rng, nullptr, options);
  result.record.seed = seed;
  result.record.trajectory_id = trajectory_id;
  return result;
}

TrajectoryResult replay_trajectory(const TrajectoryConfig& config,
                                   const SingleParticleHamiltonian& h, const JumpRecord& record,
                                   const TrajectoryOptions& options) {
  const TrajectoryConfig resolved = config.resolved();
  for (std::size_t k = 0; k < record.events.size(); ++k) {
    const JumpEvent& e = record.events[k];
    if (e.site < 0 || e.site >= resolved.spec.L) throw ConfigError("jump site outside lattice");
    const bool ordered = k == 0 ? e.time >= 0.0 : e.time > record.events[k - 1].time;
    if (!ordered) throw ConfigError("jump times must be strictly increasing");
  }
  auto propagator = make_propagator(resolved, h);
  TrajectoryResult result = drive(resolved, *propagator, nullptr, &record, options);
  result.record.seed = record.seed;
  result.record.trajectory_id = record.trajectory_id;
  return result;
}

Estimate mean_and_stderr(const std::vector<double>& values) {
  Estimate est;
  if (values.empty()) return est;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  est.mean = sum / n;
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - est.mean) * (v - est.mean);
    est.std_error = std::sqrt(ss / (n - 1.0) / n);
  }
  return est;
}

EnsembleResult reduce_ensemble(const std::vector<TrajectoryResult>& trajectories) {
  EnsembleResult out;
  out.n_traj = static_cast<int>(trajectories.size());
  for (const TrajectoryResult& tr : trajectories) {
    for (const auto& [name, value] : tr.means) out.per_trajectory[name].push_back(value);
    out.seeds.push_back(tr.record.seed);
    out.max_trace_defect = std::max(out.max_trace_defect, tr.max_trace_defect);
    out.max_orthonormality_defect =
        std::max(out.max_orthonormality_defect, tr.max_orthonormality_defect);
  }
  for (const auto& [name, values] : out.per_trajectory) {
    if (values.size() != trajectories.size()) {
      throw Error("observable " + name + " missing from some trajectories");
    }
    out.estimates[name] = mean_and_stderr(values);
  }
  return out;
}

EnsembleResult run_ensemble(const TrajectoryConfig& config, const SingleParticleHamiltonian& h,
                            int workers) {
  const TrajectoryConfig resolved = config.resolved();
  if (resolved.n_traj < 2) throw ConfigError("an ensemble needs at least two trajectories");
  const auto n = static_cast<std::size_t>(resolved.n_traj);
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  workers = std::min<int>(workers, resolved.n_traj);

  std::vector<TrajectoryResult> results(n);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  std::atomic<std::size_t> next{0};
  auto work = [&](std::size_t worker) {
    try {
      for (std::size_t id = next++; id < n; id = next++) {
        results[id] = run_trajectory(resolved, h, id);
        results[id].record.events.clear();
        results[id].record.events.shrink_to_fit();
      }
    } catch (...) {
      errors[worker] = std::current_exception();
      next = n;
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, static_cast<std::size_t>(w));
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return reduce_ensemble(results);
}

}  // namespace lrmip
