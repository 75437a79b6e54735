#pragma once

#include <Eigen/Dense>
#include <span>
#include <vector>

#include "lrmip/model.hpp"

namespace lrmip {

// Number-conserving Slater determinant prod_m (sum_j u(j,m) c_j^dag)|vac>.
// Columns of `u` are orthonormal orbitals.
struct GaussianState {
  Eigen::MatrixXcd u;
  double t = 0.0;

  int sites() const { return static_cast<int>(u.rows()); }
  int particles() const { return static_cast<int>(u.cols()); }
  // Occupations <n_j> = sum_m |u(j,m)|^2.
  Eigen::VectorXd occupations() const;
  // max |u^dag u - I|
  double orthonormality_defect() const;
};

// <c_i^dag c_j> restricted to `sites` (in the listed order).
struct CorrelationMatrix {
  Eigen::MatrixXcd D;
  std::vector<int> sites;
};

GaussianState neel_state(const LatticeSpec& spec);

// D(a, b) = <c_{s_a}^dag c_{s_b}> = sum_m conj(u(s_a, m)) u(s_b, m).
CorrelationMatrix correlation_matrix(const GaussianState& state, std::span<const int> sites);
CorrelationMatrix full_correlation_matrix(const GaussianState& state);

// Eigenvalues of D outside [-tol, 1 + tol] raise NumericalError; the rest are
// clamped to [0, 1] before the binary entropy is taken.
inline constexpr double kEigenvalueTolerance = 1e-6;

// Von Neumann entropy in bits from the eigenvalues of a correlation matrix.
double entanglement_entropy(const CorrelationMatrix& corr);
double entanglement_entropy(const Eigen::MatrixXcd& D);
double entropy_from_occupations(const Eigen::VectorXd& nu);

inline double bits_to_nats(double bits) { return bits * 0.69314718055994530942; }

// Entropy of the region `sites` for a pure state. Faster than building the
// correlation matrix first because it works from the orbital rows directly.
double region_entropy(const GaussianState& state, std::span<const int> sites);

// Re-orthonormalises the columns without changing their span.
// Throws DegenerateStateError when u is (numerically) rank deficient.
GaussianState orthonormalize(const GaussianState& state);

}  // namespace lrmip
