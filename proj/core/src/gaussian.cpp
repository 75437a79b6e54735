#include "lrmip/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "lrmip/errors.hpp"

namespace lrmip {

Eigen::VectorXd GaussianState::occupations() const { return u.rowwise().squaredNorm(); }

double GaussianState::orthonormality_defect() const {
  const Eigen::MatrixXcd gram = u.adjoint() * u;
  return (gram - Eigen::MatrixXcd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

GaussianState neel_state(const LatticeSpec& spec) {
  spec.validate();
  if (spec.N != spec.L / 2) {
    throw ConfigError("the Neel state needs N = L/2, got N = " + std::to_string(spec.N));
  }
  GaussianState state;
  state.u = Eigen::MatrixXcd::Zero(spec.L, spec.N);
  for (int m = 0; m < spec.N; ++m) state.u(2 * m, m) = 1.0;
  return state;
}

namespace {

void check_sites(const GaussianState& state, std::span<const int> sites) {
  if (sites.empty()) throw DomainError("site subset must be non-empty");
  std::vector<char> seen(static_cast<std::size_t>(state.sites()), 0);
  for (int s : sites) {
    if (s < 0 || s >= state.sites()) throw DomainError("site index out of range");
    if (seen[static_cast<std::size_t>(s)]++) throw DomainError("duplicate site in subset");
  }
}

Eigen::MatrixXcd rows_of(const GaussianState& state, std::span<const int> sites) {
  Eigen::MatrixXcd rows(static_cast<Eigen::Index>(sites.size()), state.particles());
  for (std::size_t a = 0; a < sites.size(); ++a) {
    rows.row(static_cast<Eigen::Index>(a)) = state.u.row(sites[a]);
  }
  return rows;
}

double binary_entropy_bits(double nu) {
  double s = 0.0;
  if (nu > 0.0) s -= nu * std::log2(nu);
  if (nu < 1.0) s -= (1.0 - nu) * std::log2(1.0 - nu);
  return s;
}

}  // namespace

CorrelationMatrix correlation_matrix(const GaussianState& state, std::span<const int> sites) {
  check_sites(state, sites);
  const Eigen::MatrixXcd rows = rows_of(state, sites);
  CorrelationMatrix corr;
  // conj(u_S u_S^dag) = <c_i^dag c_j>
  corr.D = (rows * rows.adjoint()).conjugate();
  corr.sites.assign(sites.begin(), sites.end());
  return corr;
}

CorrelationMatrix full_correlation_matrix(const GaussianState& state) {
  std::vector<int> all(static_cast<std::size_t>(state.sites()));
  for (int j = 0; j < state.sites(); ++j) all[static_cast<std::size_t>(j)] = j;
  return correlation_matrix(state, all);
}

double entropy_from_occupations(const Eigen::VectorXd& nu) {
  double s = 0.0;
  for (Eigen::Index m = 0; m < nu.size(); ++m) {
    const double v = nu(m);
    if (v < -kEigenvalueTolerance || v > 1.0 + kEigenvalueTolerance || std::isnan(v)) {
      throw NumericalError("correlation-matrix eigenvalue " + std::to_string(v) +
                           " lies outside [0, 1]");
    }
    s += binary_entropy_bits(std::clamp(v, 0.0, 1.0));
  }
  return s;
}

double entanglement_entropy(const Eigen::MatrixXcd& D) {
  if (D.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(D, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("eigenvalue solver failed");
  return entropy_from_occupations(solver.eigenvalues());
}

double entanglement_entropy(const CorrelationMatrix& corr) { return entanglement_entropy(corr.D); }

double region_entropy(const GaussianState& state, std::span<const int> sites) {
  check_sites(state, sites);
  const Eigen::MatrixXcd rows = rows_of(state, sites);
  // Same spectrum as the correlation matrix; the smaller Gram matrix is used
  // when the region is larger than the particle number.
  if (rows.rows() > rows.cols()) {
    const Eigen::MatrixXcd gram = rows.adjoint() * rows;
    return entanglement_entropy(gram);
  }
  return entanglement_entropy(Eigen::MatrixXcd(rows * rows.adjoint()));
}

GaussianState orthonormalize(const GaussianState& state) {
  const Eigen::Index n = state.u.cols();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(state.u);
  const Eigen::MatrixXcd r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
  const double scale = state.u.colwise().norm().maxCoeff();
  for (Eigen::Index k = 0; k < n; ++k) {
    if (!(std::abs(r(k, k)) > 1e-12 * std::max(scale, 1e-300))) {
      throw DegenerateStateError("orbital matrix is rank deficient");
    }
  }
  GaussianState out;
  out.t = state.t;
  out.u = qr.householderQ() * Eigen::MatrixXcd::Identity(state.u.rows(), n);
  return out;
}

}  // namespace lrmip
