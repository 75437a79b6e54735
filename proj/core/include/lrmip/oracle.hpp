#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "lrmip/gaussian.hpp"
#include "lrmip/model.hpp"
#include "lrmip/trajectory.hpp"

namespace lrmip {

// Dense reference implementation in the fixed-N sector. Basis states are
// occupation bitmasks (bit j = site j) ordered increasingly; a basis state is
// c_{j1}^dag c_{j2}^dag ... |vac> with j1 < j2 < ... (Jordan-Wigner order).
inline constexpr int kMaxDenseSites = 10;

std::vector<std::uint32_t> sector_basis(int L, int N);

class DenseState {
 public:
  DenseState() = default;
  DenseState(int L, int N);

  int sites() const { return L_; }
  int particles() const { return N_; }
  const std::vector<std::uint32_t>& basis() const { return basis_; }
  Eigen::VectorXcd& amplitudes() { return amplitudes_; }
  const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
  // Index of `mask` in the basis; -1 when absent.
  int index_of(std::uint32_t mask) const;

  double norm() const { return amplitudes_.norm(); }
  double occupation(int j) const;
  // <c_i^dag c_j> over the full lattice.
  Eigen::MatrixXcd correlation_matrix() const;

 private:
  int L_ = 0;
  int N_ = 0;
  std::vector<std::uint32_t> basis_;
  std::vector<int> lookup_;
  Eigen::VectorXcd amplitudes_;
};

DenseState dense_basis_state(int L, int N, std::uint32_t mask);
DenseState dense_neel_state(const LatticeSpec& spec);
// Slater determinant amplitudes det(u[S, :]) for every occupied set S.
DenseState dense_from_gaussian(const GaussianState& state);

// Sector Hamiltonian with its spectral decomposition.
class FockSector {
 public:
  FockSector(int L, int N, Eigen::MatrixXd H);

  int sites() const { return L_; }
  int particles() const { return N_; }
  const std::vector<std::uint32_t>& basis() const { return basis_; }
  const Eigen::MatrixXd& matrix() const { return H_; }
  const Eigen::VectorXd& energies() const { return energies_; }
  const Eigen::MatrixXd& modes() const { return modes_; }

 private:
  int L_;
  int N_;
  std::vector<std::uint32_t> basis_;
  Eigen::MatrixXd H_;
  Eigen::VectorXd energies_;
  Eigen::MatrixXd modes_;
};

// Hopping (with fermionic signs) plus, when include_V, V n_i n_j weighted by
// pair_coupling. Throws DomainError for L > kMaxDenseSites.
FockSector dense_hamiltonian(const LatticeSpec& spec, bool include_V = false, double V = 0.0);

// Sector matrix of sum_ij t(i,j) c_i^dag c_j for a real symmetric t.
Eigen::MatrixXd sector_bilinear(int L, int N, const Eigen::MatrixXd& t);

// Largest |eigenvalue| of sum_ij t(i,j) c_i^dag c_j over the whole Fock space.
double fock_space_norm(const Eigen::MatrixXd& t);

DenseState dense_evolve(const DenseState& state, const FockSector& H, double tau);
DenseState dense_measure(const DenseState& state, int j, double eps_occ = kEmptySiteThreshold);

// Reduced density matrix on `subsystem` (any site set, listed in increasing
// order internally) with Jordan-Wigner signs; basis = bitmasks over the
// subsystem sites in sorted order.
Eigen::MatrixXcd reduced_density_matrix(const DenseState& state, std::span<const int> subsystem);
double dense_entropy(const DenseState& state, std::span<const int> subsystem);
double dense_mutual_information(const DenseState& state, std::span<const int> a,
                                std::span<const int> c);

struct DenseSample {
  double t = 0.0;
  Eigen::MatrixXcd correlations;
  std::map<std::string, double> values;
};

// Observables of a dense state with the same names as measure_observables.
std::map<std::string, double> dense_observables(const DenseState& state,
                                                const ObservableSelection& which);

// Replays `record` exactly and samples at the configuration's sampling times.
// Throws ConfigError when the record does not fit the configuration.
std::vector<DenseSample> dense_trajectory_replay(const JumpRecord& record,
                                                 const TrajectoryConfig& config,
                                                 const FockSector& H);

}  // namespace lrmip
