#pragma once

#include <Eigen/Dense>

namespace lrmip {

// Ring of L sites with hopping amplitude 1/r^alpha for every r = 1..L/2.
//
// Sites are 0-based throughout the library. Exponents above
// `short_range_threshold` are treated as the nearest-neighbour limit: every
// coupling beyond r = 1 is exactly zero.
struct LatticeSpec {
  int L = 0;
  double alpha = 0.0;
  int N = 0;
  double short_range_threshold = 500.0;

  // Validates and fills N = L/2 when n < 0.
  static LatticeSpec make(int L, double alpha, int n = -1);
  void validate() const;
  bool short_range() const { return alpha > short_range_threshold; }
};

// Total hopping weight between sites i and j, summing the double sum over
// (j, r) literally. The antipodal pair (distance L/2) is reached twice and
// therefore carries weight 2/(L/2)^alpha. Throws DomainError for i == j.
double pair_coupling(const LatticeSpec& spec, int i, int j);

// Real symmetric single-particle matrix h with cached spectral decomposition.
class SingleParticleHamiltonian {
 public:
  explicit SingleParticleHamiltonian(Eigen::MatrixXd h);

  const Eigen::MatrixXd& matrix() const { return h_; }
  // Ascending eigenvalues and orthonormal eigenvectors (columns).
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXd& modes() const { return modes_; }
  int sites() const { return static_cast<int>(h_.rows()); }

 private:
  Eigen::MatrixXd h_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd modes_;
};

SingleParticleHamiltonian build_hopping_matrix(const LatticeSpec& spec);

// Couplings between A = sites [0, ell) and B = sites [ell, L).
struct BoundaryBlock {
  Eigen::MatrixXd M;  // ell x (L - ell), entries -pair_coupling(j, k)
  int ell = 0;
  int L = 0;

  // Single-particle form [[0, M], [M^T, 0]] of H_AB.
  Eigen::MatrixXd embedded() const;
};

BoundaryBlock build_boundary_block(const LatticeSpec& spec, int ell);

}  // namespace lrmip
