#include "lrmip/model.hpp"

#include <cmath>
#include <string>

#include "lrmip/errors.hpp"

namespace lrmip {

LatticeSpec LatticeSpec::make(int L, double alpha, int n) {
  LatticeSpec spec;
  spec.L = L;
  spec.alpha = alpha;
  spec.N = n < 0 ? L / 2 : n;
  spec.validate();
  return spec;
}

void LatticeSpec::validate() const {
  if (L < 2 || L % 2 != 0) {
    throw DomainError("lattice size must be an even integer >= 2, got " + std::to_string(L));
  }
  if (!(alpha >= 0.0) || std::isnan(alpha)) {
    throw DomainError("decay exponent must be non-negative");
  }
  if (N < 1 || N > L) {
    throw DomainError("particle number must lie in [1, L], got " + std::to_string(N));
  }
}

namespace {

double hop_weight(const LatticeSpec& spec, int r) {
  if (r == 1) return 1.0;
  if (spec.short_range()) return 0.0;
  return std::pow(static_cast<double>(r), -spec.alpha);
}

}  // namespace

double pair_coupling(const LatticeSpec& spec, int i, int j) {
  if (i < 0 || j < 0 || i >= spec.L || j >= spec.L) {
    throw DomainError("site index out of range");
  }
  if (i == j) throw DomainError("pair_coupling requires distinct sites");
  const int half = spec.L / 2;
  const int forward = ((i - j) % spec.L + spec.L) % spec.L;  // i = j + forward
  const int backward = spec.L - forward;                     // j = i + backward
  double w = 0.0;
  if (forward <= half) w += hop_weight(spec, forward);
  if (backward <= half) w += hop_weight(spec, backward);
  return w;
}

SingleParticleHamiltonian::SingleParticleHamiltonian(Eigen::MatrixXd h) : h_(std::move(h)) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(h_);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("spectral decomposition of the hopping matrix failed");
  }
  energies_ = solver.eigenvalues();
  modes_ = solver.eigenvectors();
}

SingleParticleHamiltonian build_hopping_matrix(const LatticeSpec& spec) {
  spec.validate();
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(spec.L, spec.L);
  for (int i = 0; i < spec.L; ++i) {
    for (int j = i + 1; j < spec.L; ++j) {
      const double w = -pair_coupling(spec, i, j);
      h(i, j) = w;
      h(j, i) = w;
    }
  }
  return SingleParticleHamiltonian(std::move(h));
}

Eigen::MatrixXd BoundaryBlock::embedded() const {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(L, L);
  out.topRightCorner(ell, L - ell) = M;
  out.bottomLeftCorner(L - ell, ell) = M.transpose();
  return out;
}

BoundaryBlock build_boundary_block(const LatticeSpec& spec, int ell) {
  spec.validate();
  if (ell < 1 || ell > spec.L / 2) {
    throw DomainError("subsystem size must lie in [1, L/2], got " + std::to_string(ell));
  }
  BoundaryBlock block;
  block.ell = ell;
  block.L = spec.L;
  block.M.resize(ell, spec.L - ell);
  for (int j = 0; j < ell; ++j) {
    for (int k = ell; k < spec.L; ++k) {
      block.M(j, k - ell) = -pair_coupling(spec, j, k);
    }
  }
  return block;
}

}  // namespace lrmip
