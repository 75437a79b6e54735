#include "lrmip/bounds.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <limits>
#include <numbers>

#include "lrmip/errors.hpp"
#include "lrmip/oracle.hpp"

namespace lrmip {

double bilinear_norm(const BoundaryBlock& block) {
  if (block.M.size() == 0) return 0.0;
  Eigen::BDCSVD<Eigen::MatrixXd> svd(block.M);
  return svd.singularValues().sum();
}

std::string to_string(NormScaling s) {
  switch (s) {
    case NormScaling::power:
      return "power";
    case NormScaling::logarithmic:
      return "logarithmic";
    case NormScaling::bounded:
      break;
  }
  return "bounded";
}

NormScalingSeries norm_scaling_series(double alpha, std::span<const int> sizes) {
  if (sizes.empty()) throw DomainError("no sizes given");
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    if (sizes[k] <= sizes[k - 1]) throw DomainError("sizes must be strictly increasing");
  }
  NormScalingSeries out;
  out.alpha = alpha;
  out.d = 1;
  std::vector<double> Ls;
  for (int L : sizes) {
    const LatticeSpec spec = LatticeSpec::make(L, alpha);
    out.sizes.push_back(L);
    out.norms.push_back(bilinear_norm(build_boundary_block(spec, L / 2)));
    Ls.push_back(static_cast<double>(L));
  }
  out.growth_ratio = out.norms.back() / out.norms.front();
  const bool have_power = Ls.size() >= 4;
  const bool have_log = Ls.size() >= 3;
  if (have_power) out.power = power_law_fit(Ls, out.norms);
  if (have_log) out.log = log_fit(Ls, out.norms);
  if (out.growth_ratio < kBoundedRatio) {
    out.classification = NormScaling::bounded;
  } else if (have_power && have_log) {
    out.classification = out.log.residual < out.power.residual ? NormScaling::logarithmic
                                                                : NormScaling::power;
  } else {
    out.classification = NormScaling::power;
  }
  return out;
}

namespace {

void check_d(int d) {
  if (d < 1 || d > 3) throw DomainError("dimension must be 1, 2 or 3");
}

void check_L(int L) {
  if (L < 2 || L % 2 != 0) throw DomainError("L must be even and at least 2");
}

double surface_coefficient(int d) { return d == 2 ? 2.0 : 2.0 * std::numbers::pi; }

// 1 + ((L/2)^e - 1)/e, with the e -> 0 limit 1 + log(L/2).
double growth_factor(double half, double e) {
  if (std::abs(e) < 1e-12) return 1.0 + std::log(half);
  return 1.0 + (std::pow(half, e) - 1.0) / e;
}

}  // namespace

double lemma1_bound_bilinear(const BoundParameters& p, int L, DepthConvention convention) {
  check_d(p.d);
  check_L(L);
  if (!(2.0 * p.alpha > p.d)) throw DomainError("bilinear bound requires 2 alpha > d");
  if (!(p.g_max >= 0.0)) throw DomainError("g_max must be non-negative");
  const int half = L / 2;
  if (p.d == 1) {
    const int shift = convention == DepthConvention::lattice ? 1 : 0;
    double total = 0.0;
    for (int x = 1; x <= half; ++x) {
      double inner = 0.0;
      for (int y = 1; y <= half; ++y) {
        inner += std::pow(static_cast<double>(x + y - shift), -2.0 * p.alpha);
      }
      total += std::sqrt(inner);
    }
    return 4.0 * p.g_max * total;
  }
  const double d = p.d;
  const double B = std::beta(0.5 * d - 0.5, p.alpha + 0.5 - 0.5 * d);
  const double K = 0.5 * surface_coefficient(p.d) * B / (2.0 * p.alpha - d);
  const double e = bilinear_bound_exponent(p.d, p.alpha);
  return 4.0 * p.g_max * std::sqrt(K) * growth_factor(static_cast<double>(half), e);
}

double lemma1_bound_interacting(const BoundParameters& p, int L) {
  check_d(p.d);
  check_L(L);
  if (!(p.alpha > p.d)) throw DomainError("interacting bound requires alpha > d");
  if (!(p.g_max >= 0.0)) throw DomainError("g_max must be non-negative");
  const double half = L / 2;
  if (p.d == 1) {
    const double a = p.alpha;
    double tail = 0.0;
    if (std::abs(2.0 - a) < 1e-12) {
      tail = std::log(half) / (a - 1.0);
    } else {
      tail = (std::pow(half, 2.0 - a) - 1.0) / ((a - 1.0) * (2.0 - a));
    }
    return p.g_max * (1.0 / (a - 1.0) + tail);
  }
  const double d = p.d;
  const double B = std::beta(0.5 * (d - 1.0), 0.5 * (p.alpha - d + 1.0));
  const double K = surface_coefficient(p.d) * B / (2.0 * (p.alpha - d));
  return p.g_max * K * growth_factor(half, interacting_bound_exponent(p.d, p.alpha));
}

double interacting_double_sum(double alpha, int L) {
  check_L(L);
  const int half = L / 2;
  double total = 0.0;
  for (int x = 1; x <= half; ++x) {
    for (int y = 1; y <= half; ++y) total += std::pow(static_cast<double>(x + y), -alpha);
  }
  return total;
}

double bilinear_bound_exponent(int d, double alpha) { return -alpha + 0.5 * d + 1.0; }
double interacting_bound_exponent(int d, double alpha) { return -alpha + d + 1.0; }

double classify_threshold(int d, CouplingFamily family) {
  check_d(d);
  return family == CouplingFamily::bilinear ? 0.5 * d + 1.0 : d + 1.0;
}

namespace {

using cdouble = std::complex<double>;

// rho_A (x) 1_B, or log(rho_A) (x) 1_B, as a sector operator; A = [0, ell).
Eigen::MatrixXcd embed_region_operator(const Eigen::MatrixXcd& op_A,
                                       const std::vector<std::uint32_t>& basis, int ell) {
  const std::uint32_t mask_A = (std::uint32_t{1} << ell) - 1u;
  const auto dim = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd X = Eigen::MatrixXcd::Zero(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const std::uint32_t sr = basis[static_cast<std::size_t>(r)];
    for (Eigen::Index c = 0; c < dim; ++c) {
      const std::uint32_t sc = basis[static_cast<std::size_t>(c)];
      if ((sr & ~mask_A) != (sc & ~mask_A)) continue;
      X(r, c) = op_A(sr & mask_A, sc & mask_A);
    }
  }
  return X;
}

Eigen::MatrixXcd matrix_log(const Eigen::MatrixXcd& rho) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(rho);
  Eigen::VectorXd logs = solver.eigenvalues();
  for (Eigen::Index k = 0; k < logs.size(); ++k) logs(k) = std::log(std::max(logs(k), kLogEigenFloor));
  return solver.eigenvectors() * logs.asDiagonal() * solver.eigenvectors().adjoint();
}

// Tr(h [rho, X]) for rho = |psi><psi|.
cdouble commutator_trace(const Eigen::MatrixXd& h, const Eigen::VectorXcd& psi,
                         const Eigen::MatrixXcd& X) {
  const Eigen::VectorXcd hpsi = h.cast<cdouble>() * psi;
  const Eigen::VectorXcd xpsi = X * psi;
  return xpsi.dot(hpsi) - hpsi.dot(xpsi);
}

double region_entropy_nats(const DenseState& s, int ell) {
  std::vector<int> A(static_cast<std::size_t>(ell));
  for (int k = 0; k < ell; ++k) A[static_cast<std::size_t>(k)] = k;
  return dense_entropy(s, A) * std::numbers::ln2;
}

DenseState evolve_signed(const DenseState& state, const FockSector& H, double tau) {
  Eigen::VectorXcd c = H.modes().transpose() * state.amplitudes();
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::polar(1.0, -H.energies()(k) * tau);
  DenseState out = state;
  out.amplitudes() = H.modes() * c;
  return out;
}

bool close(cdouble predicted, double measured, double tol) {
  return std::abs(predicted.real() - measured) <= tol * std::max(1.0, std::abs(measured)) &&
         std::abs(predicted.imag()) <= tol * std::max(1.0, std::abs(measured));
}

}  // namespace

GrowthRateReport growth_rate_lambda(const DenseState& rho, const BoundaryBlock& block, int ell,
                                    const FockSector* h, double dt, double match_tol) {
  const int L = rho.sites();
  if (L > kMaxDenseSites) throw DomainError("growth rate needs a dense state");
  if (block.L != L || block.ell != ell) throw DomainError("block does not match the state");
  if (ell < 1 || ell >= L) throw DomainError("region size out of range");
  if (std::abs(rho.norm() - 1.0) > 1e-9) throw DomainError("state is not normalised");

  GrowthRateReport out;
  out.norm = bilinear_norm(block);
  out.sdot_finite_difference = std::numeric_limits<double>::quiet_NaN();
  out.matching_variant = "none";

  const Eigen::MatrixXd H_AB = sector_bilinear(L, rho.particles(), block.embedded());
  const Eigen::MatrixXd h_AB = out.norm > 0.0 ? Eigen::MatrixXd(H_AB / out.norm) : H_AB;

  std::vector<int> A(static_cast<std::size_t>(ell));
  for (int k = 0; k < ell; ++k) A[static_cast<std::size_t>(k)] = k;
  const Eigen::MatrixXcd rho_A = reduced_density_matrix(rho, A);
  const Eigen::MatrixXcd X = embed_region_operator(rho_A, rho.basis(), ell);
  const Eigen::MatrixXcd X_log = embed_region_operator(matrix_log(rho_A), rho.basis(), ell);

  const cdouble minus_i(0.0, -1.0);
  out.lambda = commutator_trace(h_AB, rho.amplitudes(), X);
  out.lambda_log = commutator_trace(h_AB, rho.amplitudes(), X_log);
  out.sdot_literal = minus_i * out.norm * out.lambda;
  out.sdot_log = minus_i * out.norm * out.lambda_log;

  if (h != nullptr) {
    if (h->sites() != L || h->particles() != rho.particles()) {
      throw DomainError("Hamiltonian sector does not match the state");
    }
    const double s_plus = region_entropy_nats(evolve_signed(rho, *h, dt), ell);
    const double s_minus = region_entropy_nats(evolve_signed(rho, *h, -dt), ell);
    const double fd = (s_plus - s_minus) / (2.0 * dt);
    out.sdot_finite_difference = fd;
    if (close(out.sdot_literal, fd, match_tol)) {
      out.matching_variant = "literal";
    } else if (close(out.sdot_log, fd, match_tol)) {
      out.matching_variant = "log";
    } else if (close(-out.sdot_log, fd, match_tol)) {
      out.matching_variant = "log (opposite sign)";
    }
  }
  return out;
}

}  // namespace lrmip
