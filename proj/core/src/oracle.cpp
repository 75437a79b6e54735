#include "lrmip/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <numeric>
#include <string>
#include <unordered_map>

#include "lrmip/errors.hpp"

namespace lrmip {

using cdouble = std::complex<double>;

namespace {

void check_dense_size(int L, int N) {
  if (L < 1 || L > kMaxDenseSites) {
    throw DomainError("dense oracle supports 1 <= L <= " + std::to_string(kMaxDenseSites));
  }
  if (N < 0 || N > L) throw DomainError("particle number outside [0, L]");
}

int occupied_below(std::uint32_t mask, int site) {
  return std::popcount(mask & ((1u << site) - 1u));
}

// c_i^dag c_j |mask>: returns false when the result vanishes.
bool hop(std::uint32_t mask, int i, int j, std::uint32_t& out, double& sign) {
  if (!(mask >> j & 1u)) return false;
  if (i == j) {
    out = mask;
    sign = 1.0;
    return true;
  }
  if (mask >> i & 1u) return false;
  const std::uint32_t removed = mask & ~(1u << j);
  const int parity = occupied_below(mask, j) + occupied_below(removed, i);
  out = removed | (1u << i);
  sign = parity % 2 ? -1.0 : 1.0;
  return true;
}

}  // namespace

std::vector<std::uint32_t> sector_basis(int L, int N) {
  check_dense_size(L, N);
  std::vector<std::uint32_t> basis;
  for (std::uint32_t mask = 0; mask < (1u << L); ++mask) {
    if (std::popcount(mask) == N) basis.push_back(mask);
  }
  return basis;
}

DenseState::DenseState(int L, int N) : L_(L), N_(N), basis_(sector_basis(L, N)) {
  lookup_.assign(std::size_t{1} << L, -1);
  for (std::size_t k = 0; k < basis_.size(); ++k) lookup_[basis_[k]] = static_cast<int>(k);
  amplitudes_ = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis_.size()));
}

int DenseState::index_of(std::uint32_t mask) const {
  return mask < lookup_.size() ? lookup_[mask] : -1;
}

double DenseState::occupation(int j) const {
  double n = 0.0;
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    if (basis_[k] >> j & 1u) n += std::norm(amplitudes_(static_cast<Eigen::Index>(k)));
  }
  return n;
}

Eigen::MatrixXcd DenseState::correlation_matrix() const {
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(L_, L_);
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    const cdouble amp = amplitudes_(static_cast<Eigen::Index>(k));
    if (amp == cdouble(0.0)) continue;
    for (int i = 0; i < L_; ++i) {
      for (int j = 0; j < L_; ++j) {
        std::uint32_t out = 0;
        double sign = 0.0;
        if (!hop(basis_[k], i, j, out, sign)) continue;
        D(i, j) += std::conj(amplitudes_(index_of(out))) * sign * amp;
      }
    }
  }
  return D;
}

DenseState dense_basis_state(int L, int N, std::uint32_t mask) {
  DenseState state(L, N);
  const int k = state.index_of(mask);
  if (k < 0) throw DomainError("mask is not in the fixed-N sector");
  state.amplitudes()(k) = 1.0;
  return state;
}

DenseState dense_neel_state(const LatticeSpec& spec) {
  if (spec.N != spec.L / 2) throw ConfigError("the Neel state needs N = L/2");
  std::uint32_t mask = 0;
  for (int m = 0; m < spec.N; ++m) mask |= 1u << (2 * m);
  return dense_basis_state(spec.L, spec.N, mask);
}

DenseState dense_from_gaussian(const GaussianState& gs) {
  const int L = gs.sites();
  const int N = gs.particles();
  DenseState state(L, N);
  Eigen::MatrixXcd sub(N, N);
  for (std::size_t k = 0; k < state.basis().size(); ++k) {
    const std::uint32_t mask = state.basis()[k];
    int row = 0;
    for (int j = 0; j < L; ++j) {
      if (mask >> j & 1u) sub.row(row++) = gs.u.row(j);
    }
    state.amplitudes()(static_cast<Eigen::Index>(k)) = N == 0 ? cdouble(1.0) : sub.determinant();
  }
  return state;
}

FockSector::FockSector(int L, int N, Eigen::MatrixXd H)
    : L_(L), N_(N), basis_(sector_basis(L, N)), H_(std::move(H)) {
  if (H_.rows() != static_cast<Eigen::Index>(basis_.size()) || H_.cols() != H_.rows()) {
    throw DomainError("sector matrix has the wrong dimension");
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H_);
  if (solver.info() != Eigen::Success) throw NumericalError("sector eigensolver failed");
  energies_ = solver.eigenvalues();
  modes_ = solver.eigenvectors();
}

Eigen::MatrixXd sector_bilinear(int L, int N, const Eigen::MatrixXd& t) {
  const std::vector<std::uint32_t> basis = sector_basis(L, N);
  std::vector<int> lookup(std::size_t{1} << L, -1);
  for (std::size_t k = 0; k < basis.size(); ++k) lookup[basis[k]] = static_cast<int>(k);
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) {
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        if (t(i, j) == 0.0) continue;
        std::uint32_t out = 0;
        double sign = 0.0;
        if (!hop(basis[static_cast<std::size_t>(k)], i, j, out, sign)) continue;
        H(lookup[out], k) += t(i, j) * sign;
      }
    }
  }
  return H;
}

FockSector dense_hamiltonian(const LatticeSpec& spec, bool include_V, double V) {
  spec.validate();
  check_dense_size(spec.L, spec.N);
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(spec.L, spec.L);
  for (int i = 0; i < spec.L; ++i) {
    for (int j = 0; j < spec.L; ++j) {
      if (i != j) t(i, j) = -pair_coupling(spec, i, j);
    }
  }
  Eigen::MatrixXd H = sector_bilinear(spec.L, spec.N, t);
  if (include_V && V != 0.0) {
    const std::vector<std::uint32_t> basis = sector_basis(spec.L, spec.N);
    for (std::size_t k = 0; k < basis.size(); ++k) {
      double diag = 0.0;
      for (int i = 0; i < spec.L; ++i) {
        for (int j = i + 1; j < spec.L; ++j) {
          if ((basis[k] >> i & 1u) && (basis[k] >> j & 1u)) diag += V * pair_coupling(spec, i, j);
        }
      }
      H(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k)) += diag;
    }
  }
  return FockSector(spec.L, spec.N, std::move(H));
}

double fock_space_norm(const Eigen::MatrixXd& t) {
  const int L = static_cast<int>(t.rows());
  check_dense_size(L, 0);
  double best = 0.0;
  for (int N = 0; N <= L; ++N) {
    const Eigen::MatrixXd H = sector_bilinear(L, N, t);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(H, Eigen::EigenvaluesOnly);
    best = std::max(best, solver.eigenvalues().cwiseAbs().maxCoeff());
  }
  return best;
}

DenseState dense_evolve(const DenseState& state, const FockSector& H, double tau) {
  if (tau < 0.0) throw DomainError("evolution time must be non-negative");
  if (state.sites() != H.sites() || state.particles() != H.particles()) {
    throw DomainError("state and Hamiltonian sectors differ");
  }
  Eigen::VectorXcd c = H.modes().transpose() * state.amplitudes();
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -H.energies()(k) * tau);
  DenseState out = state;
  out.amplitudes() = H.modes() * c;
  return out;
}

DenseState dense_measure(const DenseState& state, int j, double eps_occ) {
  if (j < 0 || j >= state.sites()) throw DomainError("site index out of range");
  DenseState out = state;
  double weight = 0.0;
  for (std::size_t k = 0; k < out.basis().size(); ++k) {
    const auto idx = static_cast<Eigen::Index>(k);
    if (out.basis()[k] >> j & 1u) {
      weight += std::norm(out.amplitudes()(idx));
    } else {
      out.amplitudes()(idx) = 0.0;
    }
  }
  if (!(weight > eps_occ)) {
    throw EmptySiteError("measurement of site " + std::to_string(j) + " with occupation " +
                         std::to_string(weight));
  }
  out.amplitudes() /= std::sqrt(weight);
  return out;
}

Eigen::MatrixXcd reduced_density_matrix(const DenseState& state, std::span<const int> subsystem) {
  std::vector<int> sites(subsystem.begin(), subsystem.end());
  std::sort(sites.begin(), sites.end());
  if (std::adjacent_find(sites.begin(), sites.end()) != sites.end()) {
    throw DomainError("duplicate site in subsystem");
  }
  std::uint32_t region = 0;
  for (int s : sites) {
    if (s < 0 || s >= state.sites()) throw DomainError("site index out of range");
    region |= 1u << s;
  }
  const auto k = static_cast<Eigen::Index>(sites.size());
  const Eigen::Index dim = Eigen::Index{1} << k;

  // Group amplitudes by the configuration of the complement; reorder the
  // creation operators so that the subsystem modes come first.
  std::unordered_map<std::uint32_t, Eigen::VectorXcd> groups;
  for (std::size_t n = 0; n < state.basis().size(); ++n) {
    const std::uint32_t mask = state.basis()[n];
    const cdouble amp = state.amplitudes()(static_cast<Eigen::Index>(n));
    const std::uint32_t rest = mask & ~region;
    std::uint32_t local = 0;
    int parity = 0;
    for (Eigen::Index a = 0; a < k; ++a) {
      const int s = sites[static_cast<std::size_t>(a)];
      if (mask >> s & 1u) {
        local |= 1u << a;
        parity += std::popcount(rest & ((1u << s) - 1u));
      }
    }
    auto [it, inserted] = groups.try_emplace(rest, Eigen::VectorXcd::Zero(dim));
    it->second(local) += (parity % 2 ? -1.0 : 1.0) * amp;
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  std::vector<std::uint32_t> keys;
  keys.reserve(groups.size());
  for (const auto& [key, vec] : groups) keys.push_back(key);
  std::sort(keys.begin(), keys.end());
  for (std::uint32_t key : keys) {
    const Eigen::VectorXcd& v = groups.at(key);
    rho.noalias() += v * v.adjoint();
  }
  return rho;
}

double dense_entropy(const DenseState& state, std::span<const int> subsystem) {
  if (subsystem.empty()) return 0.0;
  const Eigen::MatrixXcd rho = reduced_density_matrix(state, subsystem);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho, Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index k = 0; k < solver.eigenvalues().size(); ++k) {
    const double p = solver.eigenvalues()(k);
    if (p > 0.0) s -= p * std::log2(p);
  }
  return s;
}

double dense_mutual_information(const DenseState& state, std::span<const int> a,
                                std::span<const int> c) {
  std::vector<int> ac(a.begin(), a.end());
  ac.insert(ac.end(), c.begin(), c.end());
  return dense_entropy(state, a) + dense_entropy(state, c) - dense_entropy(state, ac);
}

std::map<std::string, double> dense_observables(const DenseState& state,
                                                const ObservableSelection& which) {
  std::map<std::string, double> values;
  const int L = state.sites();
  auto range = [](int begin, int end) {
    std::vector<int> v(static_cast<std::size_t>(end - begin));
    std::iota(v.begin(), v.end(), begin);
    return v;
  };
  if (which.profile) {
    for (int ell = 1; ell <= L / 2; ++ell) {
      values["S_" + std::to_string(ell)] = dense_entropy(state, range(0, ell));
    }
  }
  if (which.half) values["S_half"] = dense_entropy(state, range(0, L / 2));
  if (which.mi_quarters && L % 8 == 0) {
    const int e = L / 8;
    values["I_quarters"] =
        dense_mutual_information(state, range(0, e), range(L / 2, L / 2 + e));
  }
  if (which.mi_far) {
    const std::vector<int> a{0};
    const std::vector<int> c{L / 2};
    values["I_far"] = dense_mutual_information(state, a, c);
  }
  return values;
}

std::vector<DenseSample> dense_trajectory_replay(const JumpRecord& record,
                                                 const TrajectoryConfig& config,
                                                 const FockSector& H) {
  const TrajectoryConfig resolved = config.resolved();
  if (H.sites() != resolved.spec.L || H.particles() != resolved.spec.N) {
    throw ConfigError("sector does not match the configuration");
  }
  for (std::size_t k = 0; k < record.events.size(); ++k) {
    const JumpEvent& e = record.events[k];
    if (e.site < 0 || e.site >= resolved.spec.L) throw ConfigError("jump site outside lattice");
    const bool ordered = k == 0 ? e.time >= 0.0 : e.time > record.events[k - 1].time;
    if (!ordered) throw ConfigError("jump times must be strictly increasing");
  }
  const std::vector<double> times = resolved.sampling_times();
  if (!record.events.empty() && !(record.events.back().time < times.back())) {
    throw ConfigError("jump record extends beyond the configured run length");
  }

  DenseState state = dense_neel_state(resolved.spec);
  std::vector<DenseSample> samples;
  double t = 0.0;
  std::size_t next = 0;
  for (double s : times) {
    while (next < record.events.size() && record.events[next].time < s) {
      state = dense_evolve(state, H, record.events[next].time - t);
      t = record.events[next].time;
      state = dense_measure(state, record.events[next].site);
      ++next;
    }
    state = dense_evolve(state, H, s - t);
    t = s;
    DenseSample sample;
    sample.t = s;
    sample.correlations = state.correlation_matrix();
    sample.values = dense_observables(state, resolved.observables);
    samples.push_back(std::move(sample));
  }
  return samples;
}

}  // namespace lrmip
