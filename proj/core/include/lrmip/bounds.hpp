#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "lrmip/model.hpp"
#include "lrmip/scaling.hpp"

namespace lrmip {

class DenseState;
class FockSector;

// Many-body operator norm of the particle-conserving bilinear H_AB: the sum of
// singular values of the coupling block.
double bilinear_norm(const BoundaryBlock& block);

enum class NormScaling { power, logarithmic, bounded };
std::string to_string(NormScaling s);

struct NormScalingSeries {
  double alpha = 0.0;
  int d = 1;
  std::vector<int> sizes;
  std::vector<double> norms;
  NormScaling classification = NormScaling::bounded;
  PowerLawFit power;
  LogFit log;
  double growth_ratio = 1.0;  // norm(L_max) / norm(L_min)
};

// Relative growth below which a series counts as bounded.
inline constexpr double kBoundedRatio = 1.05;

// ||H_AB|| for ell = L/2 over increasing sizes, classified as bounded when the
// growth ratio stays below kBoundedRatio and otherwise by the smaller
// residual of the power-law and logarithmic fits.
NormScalingSeries norm_scaling_series(double alpha, std::span<const int> sizes);

struct BoundParameters {
  double alpha = 0.0;
  int d = 1;
  double g_max = 1.0;
};

// Distance between i in A at depth x and j in B at depth y (both >= 1).
//   lattice: r = x + y - 1, adjacent sites across the cut are at distance 1.
//   printed: r = x + y, which skips the unit distance across the cut.
enum class DepthConvention { lattice, printed };

// Upper bound on ||H_AB|| / A for bilinear couplings |h_ij| <= g_max / r^alpha.
// d = 1: 4 g_max sum_x [sum_y r(x,y)^(-2 alpha)]^(1/2), x, y = 1..L/2.
// d = 2, 3: closed form with the beta function B(d/2 - 1/2, alpha + 1/2 - d/2).
// Throws DomainError unless 2 alpha > d.
double lemma1_bound_bilinear(const BoundParameters& p, int L,
                             DepthConvention convention = DepthConvention::lattice);

// Closed-form bound for generic two-body couplings. Throws DomainError unless
// alpha > d.
double lemma1_bound_interacting(const BoundParameters& p, int L);

// Direct double sum sum_{x,y=1}^{L/2} (x+y)^-alpha that the d = 1
// interacting closed form majorises.
double interacting_double_sum(double alpha, int L);

// Exponent of the L-dependent term, (L/2)^exponent, in the bounds above.
double bilinear_bound_exponent(int d, double alpha);
double interacting_bound_exponent(int d, double alpha);

enum class CouplingFamily { bilinear, interacting };

// alpha_sc = d/2 + 1 (bilinear) or d + 1 (interacting).
double classify_threshold(int d, CouplingFamily family);

struct GrowthRateReport {
  double norm = 0.0;                  // ||H_AB||
  std::complex<double> lambda;        // Tr(h_AB [rho, rho_A (x) 1_B])
  std::complex<double> lambda_log;    // Tr(h_AB [rho, log rho_A (x) 1_B])
  std::complex<double> sdot_literal;  // -i ||H_AB|| lambda
  std::complex<double> sdot_log;      // -i ||H_AB|| lambda_log (nats per unit time)
  double sdot_finite_difference = 0.0;  // nats per unit time; NaN when not computed
  std::string matching_variant;       // literal | log | log (opposite sign) | none
};

inline constexpr double kLogEigenFloor = 1e-14;

// Evaluates both forms of the growth-rate expression for a pure dense state
// and region A = sites [0, ell). When `h` is given, dS/dt is also estimated by
// a central difference with step dt in the dense evolution, and the variant
// matching it within `match_tol` is named.
GrowthRateReport growth_rate_lambda(const DenseState& rho, const BoundaryBlock& block, int ell,
                                    const FockSector* h = nullptr, double dt = 1e-5,
                                    double match_tol = 1e-6);

}  // namespace lrmip
