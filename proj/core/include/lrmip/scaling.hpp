#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace lrmip {

struct CurvePoint {
  double gamma = 0.0;
  double value = 0.0;
  double error = 0.0;
};

// One system size; points sorted by strictly increasing gamma.
struct Curve {
  int L = 0;
  std::vector<CurvePoint> points;
};

struct CurveFamily {
  std::vector<Curve> curves;

  // Throws DomainError unless every curve has >= 3 strictly increasing points.
  void validate() const;
  const Curve& size(int L) const;
};

struct Crossing {
  std::optional<double> gamma;
  int sign_changes = 0;
  bool ambiguous = false;  // more than one sign change; `gamma` is the largest
};

// Zero of value(large) - value(small), linearly interpolated. The larger curve
// is interpolated onto the grid of the smaller one inside their common range.
Crossing detect_crossing(const Curve& small, const Curve& large);
Crossing detect_crossing(const CurveFamily& family, int L1, int L2);

struct CrossingInterval {
  std::optional<double> estimate;
  double lo = 0.0;
  double hi = 0.0;
  double found_fraction = 0.0;  // resamples that produced a crossing
  int resamples = 0;
  // CI endpoints are only meaningful when most resamples cross.
  bool bounded() const { return found_fraction >= 0.95; }
};

// Nonparametric bootstrap: samples_*[k] are per-trajectory values at gammas[k];
// each resample draws trajectories with replacement independently per cell.
CrossingInterval bootstrap_crossing(const std::vector<double>& gammas,
                                    const std::vector<std::vector<double>>& samples_small,
                                    const std::vector<std::vector<double>>& samples_large,
                                    int resamples, std::uint64_t seed, double confidence = 0.95);

// Parametric bootstrap from mean +- error (Gaussian), for summarised data.
CrossingInterval bootstrap_crossing_parametric(const Curve& small, const Curve& large,
                                               int resamples, std::uint64_t seed,
                                               double confidence = 0.95);

enum class CollapseMethod { bkt, power_law };

struct ScalingFitResult {
  CollapseMethod method = CollapseMethod::bkt;
  double gamma_c = 0.0;  // gamma_p for the power-law ansatz
  double nu = 0.0;
  double beta = 0.0;     // power-law only
  double residual = 0.0;
  int points_used = 0;
  bool at_boundary = false;  // optimum sits on an edge of the search box
};

struct SearchRange {
  double lo = 0.0;
  double hi = 0.0;
  double step = 0.1;
};

struct CollapseOptions {
  double bandwidth = 0.5;        // Gaussian kernel width of the master curve, in x
  bool natural_log = true;       // log base of g(L) and of log L in x
  SearchRange gamma_c{0.0, 1.0, 0.02};
  SearchRange nu{0.5, 10.0, 0.1};
  SearchRange beta{0.0, 5.0, 0.25};
  int refine_sweeps = 6;
  int min_points = 8;
  int workers = 1;
};

// g(L) = [1 + 1/(2 log L - 4)]^-1
double bkt_g(int L, bool natural_log = true);

// Normalised collapse objective: weighted mean squared deviation of every
// point from a local-linear master curve built from the other sizes, divided
// by the weighted variance of the rescaled values. Infinity when fewer than
// `min_points` points (or half of them) overlap another curve.
double collapse_residual_bkt(const CurveFamily& family, double gamma_c, double nu,
                             const CollapseOptions& options = {});
double collapse_residual_power_law(const CurveFamily& family, double gamma_p, double beta,
                                   double nu, const CollapseOptions& options = {});

// Grid search followed by coordinate-wise golden-section refinement.
// x = log L - nu / sqrt(gamma - gamma_c),  y = g(L) gamma I.
ScalingFitResult bkt_collapse_fit(const CurveFamily& family, const CollapseOptions& options = {});
// x = (gamma - gamma_p) L^(1/nu),  y = L^beta I.
ScalingFitResult power_law_collapse_fit(const CurveFamily& family,
                                        const CollapseOptions& options = {});

struct PowerLawFit {
  double a = 0.0;
  double mu = 0.0;
  double b = 0.0;
  double residual = 0.0;  // sum of squared deviations
  double a_error = 0.0;
  double mu_error = 0.0;
  double b_error = 0.0;
  bool identifiable = true;  // false when the data carry no L dependence
};

// value = a L^mu + b. Throws FitError for fewer than 4 sizes.
PowerLawFit power_law_fit(std::span<const double> sizes, std::span<const double> values);

struct LogFit {
  double p = 0.0;
  double q = 0.0;
  double residual = 0.0;
};

// value = p log L + q. Throws FitError for fewer than 3 sizes.
LogFit log_fit(std::span<const double> sizes, std::span<const double> values);

std::string to_string(CollapseMethod method);

}  // namespace lrmip
