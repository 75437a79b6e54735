#include "lrmip/scaling.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "lrmip/errors.hpp"
#include "lrmip/rng.hpp"

namespace lrmip {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

void CurveFamily::validate() const {
  if (curves.empty()) throw DomainError("curve family is empty");
  for (const Curve& c : curves) {
    if (c.points.size() < 3) {
      throw DomainError("curve L=" + std::to_string(c.L) + " has fewer than 3 points");
    }
    for (std::size_t k = 1; k < c.points.size(); ++k) {
      if (!(c.points[k].gamma > c.points[k - 1].gamma)) {
        throw DomainError("curve L=" + std::to_string(c.L) + " is not strictly increasing in gamma");
      }
    }
  }
}

const Curve& CurveFamily::size(int L) const {
  for (const Curve& c : curves) {
    if (c.L == L) return c;
  }
  throw DomainError("no curve for L=" + std::to_string(L));
}

std::string to_string(CollapseMethod method) {
  return method == CollapseMethod::bkt ? "bkt" : "power_law";
}

// ---------------------------------------------------------------- crossings

namespace {

double interpolate(const Curve& c, double gamma) {
  const auto& p = c.points;
  auto it = std::lower_bound(p.begin(), p.end(), gamma,
                             [](const CurvePoint& a, double g) { return a.gamma < g; });
  if (it == p.end()) return p.back().value;
  if (it->gamma == gamma || it == p.begin()) return it->value;
  const CurvePoint& hi = *it;
  const CurvePoint& lo = *(it - 1);
  const double f = (gamma - lo.gamma) / (hi.gamma - lo.gamma);
  return lo.value + f * (hi.value - lo.value);
}

Crossing crossing_of_difference(const std::vector<double>& gammas, const std::vector<double>& diff) {
  Crossing out;
  std::vector<double> found;
  std::size_t prev = diff.size();  // index of the previous non-zero entry
  for (std::size_t k = 0; k < diff.size(); ++k) {
    if (diff[k] == 0.0) continue;
    if (prev < diff.size() && (diff[prev] > 0.0) != (diff[k] > 0.0)) {
      if (k == prev + 1) {
        const double f = diff[prev] / (diff[prev] - diff[k]);
        found.push_back(gammas[prev] + f * (gammas[k] - gammas[prev]));
      } else {
        double sum = 0.0;
        for (std::size_t z = prev + 1; z < k; ++z) sum += gammas[z];
        found.push_back(sum / static_cast<double>(k - prev - 1));
      }
    }
    prev = k;
  }
  out.sign_changes = static_cast<int>(found.size());
  out.ambiguous = found.size() > 1;
  if (!found.empty()) out.gamma = *std::max_element(found.begin(), found.end());
  return out;
}

}  // namespace

Crossing detect_crossing(const Curve& small, const Curve& large) {
  if (small.points.size() < 2 || large.points.size() < 2) {
    throw DomainError("crossing detection needs at least two points per curve");
  }
  const double lo = std::max(small.points.front().gamma, large.points.front().gamma);
  const double hi = std::min(small.points.back().gamma, large.points.back().gamma);
  std::vector<double> gammas;
  std::vector<double> diff;
  for (const CurvePoint& p : small.points) {
    if (p.gamma < lo || p.gamma > hi) continue;
    gammas.push_back(p.gamma);
    diff.push_back(interpolate(large, p.gamma) - p.value);
  }
  return crossing_of_difference(gammas, diff);
}

Crossing detect_crossing(const CurveFamily& family, int L1, int L2) {
  const Curve& a = family.size(std::min(L1, L2));
  const Curve& b = family.size(std::max(L1, L2));
  return detect_crossing(a, b);
}

namespace {

double quantile(std::vector<double> v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto k = static_cast<std::size_t>(std::floor(pos));
  if (k + 1 >= v.size()) return v.back();
  return v[k] + (pos - static_cast<double>(k)) * (v[k + 1] - v[k]);
}

CrossingInterval summarise(std::optional<double> estimate, const std::vector<double>& found,
                           int resamples, double confidence) {
  CrossingInterval ci;
  ci.estimate = estimate;
  ci.resamples = resamples;
  ci.found_fraction = resamples > 0 ? static_cast<double>(found.size()) / resamples : 0.0;
  if (!found.empty()) {
    ci.lo = quantile(found, 0.5 * (1.0 - confidence));
    ci.hi = quantile(found, 1.0 - 0.5 * (1.0 - confidence));
  } else {
    ci.lo = std::numeric_limits<double>::quiet_NaN();
    ci.hi = ci.lo;
  }
  return ci;
}

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double standard_normal(RandomStream& rng) {
  const double u1 = rng.uniform_open_closed();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace

CrossingInterval bootstrap_crossing(const std::vector<double>& gammas,
                                    const std::vector<std::vector<double>>& samples_small,
                                    const std::vector<std::vector<double>>& samples_large,
                                    int resamples, std::uint64_t seed, double confidence) {
  const std::size_t n = gammas.size();
  if (samples_small.size() != n || samples_large.size() != n || n < 2) {
    throw DomainError("bootstrap needs one sample vector per gamma for both sizes");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (samples_small[k].empty() || samples_large[k].empty()) {
      throw DomainError("empty sample vector in bootstrap");
    }
  }
  std::vector<double> diff(n);
  for (std::size_t k = 0; k < n; ++k) diff[k] = mean_of(samples_large[k]) - mean_of(samples_small[k]);
  const std::optional<double> estimate = crossing_of_difference(gammas, diff).gamma;

  auto resample_mean = [](const std::vector<double>& v, RandomStream& rng) {
    double s = 0.0;
    const auto m = static_cast<std::uint64_t>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) s += v[rng.next() % m];
    return s / static_cast<double>(v.size());
  };
  std::vector<double> found;
  for (int r = 0; r < resamples; ++r) {
    RandomStream rng(stream_seed(seed, static_cast<std::uint64_t>(r)));
    for (std::size_t k = 0; k < n; ++k) {
      diff[k] = resample_mean(samples_large[k], rng) - resample_mean(samples_small[k], rng);
    }
    if (auto g = crossing_of_difference(gammas, diff).gamma) found.push_back(*g);
  }
  return summarise(estimate, found, resamples, confidence);
}

CrossingInterval bootstrap_crossing_parametric(const Curve& small, const Curve& large,
                                               int resamples, std::uint64_t seed,
                                               double confidence) {
  const std::optional<double> estimate = detect_crossing(small, large).gamma;
  std::vector<double> found;
  for (int r = 0; r < resamples; ++r) {
    RandomStream rng(stream_seed(seed, static_cast<std::uint64_t>(r)));
    Curve a = small;
    Curve b = large;
    for (CurvePoint& p : a.points) p.value += p.error * standard_normal(rng);
    for (CurvePoint& p : b.points) p.value += p.error * standard_normal(rng);
    if (auto g = detect_crossing(a, b).gamma) found.push_back(*g);
  }
  return summarise(estimate, found, resamples, confidence);
}

// ----------------------------------------------------------------- collapse

double bkt_g(int L, bool natural_log) {
  const double logL = natural_log ? std::log(static_cast<double>(L)) : std::log2(static_cast<double>(L));
  return 1.0 / (1.0 + 1.0 / (2.0 * logL - 4.0));
}

namespace {

struct CollapsePoint {
  int curve;
  double x;
  double y;
  double w;
};

bool all_errors_positive(const CurveFamily& family) {
  for (const Curve& c : family.curves) {
    for (const CurvePoint& p : c.points) {
      if (!(p.error > 0.0)) return false;
    }
  }
  return true;
}

double collapse_objective(std::vector<CollapsePoint> pts, int curves, int total_points,
                          const CollapseOptions& opt) {
  if (pts.empty()) return kInf;
  std::sort(pts.begin(), pts.end(), [](const CollapsePoint& a, const CollapsePoint& b) {
    return a.x < b.x || (a.x == b.x && a.curve < b.curve);
  });
  std::vector<double> xmin(static_cast<std::size_t>(curves), kInf);
  std::vector<double> xmax(static_cast<std::size_t>(curves), -kInf);
  for (const CollapsePoint& p : pts) {
    auto c = static_cast<std::size_t>(p.curve);
    xmin[c] = std::min(xmin[c], p.x);
    xmax[c] = std::max(xmax[c], p.x);
  }
  const double h = opt.bandwidth;
  const double reach = 5.0 * h;

  double sw = 0.0;
  double swd = 0.0;
  std::vector<std::size_t> used;
  std::size_t lo = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const CollapsePoint& p = pts[i];
    bool bracketed = false;
    for (int c = 0; c < curves && !bracketed; ++c) {
      auto cc = static_cast<std::size_t>(c);
      bracketed = c != p.curve && xmin[cc] <= p.x && p.x <= xmax[cc];
    }
    if (!bracketed) continue;
    while (pts[lo].x < p.x - reach) ++lo;
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, t0 = 0.0, t1 = 0.0;
    for (std::size_t j = lo; j < pts.size() && pts[j].x <= p.x + reach; ++j) {
      if (pts[j].curve == p.curve) continue;
      const double dx = pts[j].x - p.x;
      const double k = std::exp(-0.5 * (dx / h) * (dx / h)) * pts[j].w;
      s0 += k;
      s1 += k * dx;
      s2 += k * dx * dx;
      t0 += k * pts[j].y;
      t1 += k * dx * pts[j].y;
    }
    if (!(s0 > 0.0)) continue;
    const double det = s0 * s2 - s1 * s1;
    double fit = 0.0;
    if (det > 1e-12 * s0 * s0 * h * h) {
      fit = (s2 * t0 - s1 * t1) / det;
    } else {
      fit = t0 / s0;
    }
    const double d = p.y - fit;
    sw += p.w;
    swd += p.w * d * d;
    used.push_back(i);
  }
  const auto n_used = static_cast<int>(used.size());
  if (n_used < opt.min_points || 2 * n_used < total_points) return kInf;
  double ybar = 0.0;
  for (std::size_t i : used) ybar += pts[i].w * pts[i].y;
  ybar /= sw;
  double var = 0.0;
  for (std::size_t i : used) var += pts[i].w * (pts[i].y - ybar) * (pts[i].y - ybar);
  var /= sw;
  const double msd = swd / sw;
  return var > 0.0 ? msd / var : msd;
}

int total_points(const CurveFamily& family) {
  int n = 0;
  for (const Curve& c : family.curves) n += static_cast<int>(c.points.size());
  return n;
}

int points_used_bkt(const CurveFamily& family, double gamma_c) {
  int n = 0;
  for (const Curve& c : family.curves) {
    for (const CurvePoint& p : c.points) n += p.gamma > gamma_c;
  }
  return n;
}

}  // namespace

double collapse_residual_bkt(const CurveFamily& family, double gamma_c, double nu,
                             const CollapseOptions& options) {
  const bool weighted = all_errors_positive(family);
  std::vector<CollapsePoint> pts;
  int included = 0;
  for (std::size_t c = 0; c < family.curves.size(); ++c) {
    const Curve& curve = family.curves[c];
    const double g = bkt_g(curve.L, options.natural_log);
    const double logL = options.natural_log ? std::log(static_cast<double>(curve.L))
                                            : std::log2(static_cast<double>(curve.L));
    for (const CurvePoint& p : curve.points) {
      if (!(p.gamma > gamma_c)) continue;
      ++included;
      const double scale = g * p.gamma;
      const double w = weighted ? 1.0 / (scale * p.error * scale * p.error) : 1.0;
      pts.push_back({static_cast<int>(c), logL - nu / std::sqrt(p.gamma - gamma_c),
                     scale * p.value, w});
    }
  }
  return collapse_objective(std::move(pts), static_cast<int>(family.curves.size()), included,
                            options);
}

double collapse_residual_power_law(const CurveFamily& family, double gamma_p, double beta,
                                   double nu, const CollapseOptions& options) {
  if (!(nu > 0.0)) return kInf;
  const bool weighted = all_errors_positive(family);
  std::vector<CollapsePoint> pts;
  for (std::size_t c = 0; c < family.curves.size(); ++c) {
    const Curve& curve = family.curves[c];
    const double L = static_cast<double>(curve.L);
    const double xs = std::pow(L, 1.0 / nu);
    const double ys = std::pow(L, beta);
    for (const CurvePoint& p : curve.points) {
      const double w = weighted ? 1.0 / (ys * p.error * ys * p.error) : 1.0;
      pts.push_back({static_cast<int>(c), (p.gamma - gamma_p) * xs, ys * p.value, w});
    }
  }
  return collapse_objective(std::move(pts), static_cast<int>(family.curves.size()),
                            total_points(family), options);
}

namespace {

std::vector<double> grid_of(const SearchRange& r) {
  if (!(r.hi >= r.lo) || !(r.step > 0.0)) throw FitError("invalid search range");
  std::vector<double> g;
  const auto n = static_cast<long>(std::floor((r.hi - r.lo) / r.step + 1e-9));
  for (long k = 0; k <= n; ++k) g.push_back(r.lo + static_cast<double>(k) * r.step);
  return g;
}

// Evaluates f on every grid point (possibly in parallel) and returns the
// arg-min; ties go to the lexicographically smallest parameter vector, which
// is the earliest index because grids are generated in lexicographic order.
template <std::size_t D>
std::array<double, D> grid_argmin(const std::array<std::vector<double>, D>& axes,
                                  const std::function<double(const std::array<double, D>&)>& f,
                                  int workers, double& best_value) {
  std::size_t total = 1;
  for (const auto& a : axes) total *= a.size();
  auto point = [&](std::size_t idx) {
    std::array<double, D> p{};
    for (std::size_t d = D; d-- > 0;) {
      p[d] = axes[d][idx % axes[d].size()];
      idx /= axes[d].size();
    }
    return p;
  };
  std::vector<double> values(total, kInf);
  workers = std::max(1, workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < total; ++i) values[i] = f(point(i));
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = static_cast<std::size_t>(w); i < total; i += static_cast<std::size_t>(workers)) {
          values[i] = f(point(i));
        }
      });
    }
    for (auto& th : pool) th.join();
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < total; ++i) {
    if (values[i] < values[best]) best = i;
  }
  best_value = values[best];
  return point(best);
}

// Golden-section minimisation of a 1-D slice on [a, b].
double golden_section(const std::function<double(double)>& f, double a, double b, double& fbest,
                      int iterations = 40) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int k = 0; k < iterations; ++k) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  if (fc <= fd) {
    fbest = fc;
    return c;
  }
  fbest = fd;
  return d;
}

template <std::size_t D>
std::array<double, D> refine(std::array<double, D> best, double& best_value,
                             const std::array<SearchRange, D>& ranges,
                             const std::function<double(const std::array<double, D>&)>& f,
                             int sweeps) {
  std::array<double, D> width{};
  for (std::size_t d = 0; d < D; ++d) width[d] = ranges[d].step;
  for (int s = 0; s < sweeps; ++s) {
    for (std::size_t d = 0; d < D; ++d) {
      if (ranges[d].hi <= ranges[d].lo) continue;
      const double a = std::max(ranges[d].lo, best[d] - width[d]);
      const double b = std::min(ranges[d].hi, best[d] + width[d]);
      std::array<double, D> probe = best;
      double fv = kInf;
      const double x = golden_section(
          [&](double v) {
            probe[d] = v;
            return f(probe);
          },
          a, b, fv);
      if (fv < best_value) {
        best_value = fv;
        best[d] = x;
      }
      width[d] *= 0.5;
    }
  }
  return best;
}

template <std::size_t D>
bool on_boundary(const std::array<double, D>& p, const std::array<SearchRange, D>& ranges) {
  for (std::size_t d = 0; d < D; ++d) {
    if (ranges[d].hi <= ranges[d].lo) continue;
    const double tol = 1e-6 * (ranges[d].hi - ranges[d].lo);
    if (p[d] - ranges[d].lo < tol || ranges[d].hi - p[d] < tol) return true;
  }
  return false;
}

}  // namespace

ScalingFitResult bkt_collapse_fit(const CurveFamily& family, const CollapseOptions& options) {
  family.validate();
  if (family.curves.size() < 3) throw FitError("BKT collapse needs at least 3 sizes");
  const std::array<SearchRange, 2> ranges{options.gamma_c, options.nu};
  const std::array<std::vector<double>, 2> axes{grid_of(ranges[0]), grid_of(ranges[1])};
  std::function<double(const std::array<double, 2>&)> f = [&](const std::array<double, 2>& p) {
    return collapse_residual_bkt(family, p[0], p[1], options);
  };
  double value = kInf;
  std::array<double, 2> best = grid_argmin<2>(axes, f, options.workers, value);
  if (!std::isfinite(value)) throw FitError("no admissible (gamma_c, nu) in the search box");
  best = refine<2>(best, value, ranges, f, options.refine_sweeps);
  ScalingFitResult out;
  out.method = CollapseMethod::bkt;
  out.gamma_c = best[0];
  out.nu = best[1];
  out.residual = value;
  out.points_used = points_used_bkt(family, best[0]);
  out.at_boundary = on_boundary<2>(best, ranges);
  return out;
}

ScalingFitResult power_law_collapse_fit(const CurveFamily& family, const CollapseOptions& options) {
  family.validate();
  if (family.curves.size() < 2) throw FitError("power-law collapse needs at least 2 sizes");
  const std::array<SearchRange, 3> ranges{options.gamma_c, options.beta, options.nu};
  const std::array<std::vector<double>, 3> axes{grid_of(ranges[0]), grid_of(ranges[1]),
                                                grid_of(ranges[2])};
  std::function<double(const std::array<double, 3>&)> f = [&](const std::array<double, 3>& p) {
    return collapse_residual_power_law(family, p[0], p[1], p[2], options);
  };
  double value = kInf;
  std::array<double, 3> best = grid_argmin<3>(axes, f, options.workers, value);
  if (!std::isfinite(value)) throw FitError("no admissible (gamma_p, beta, nu) in the search box");
  best = refine<3>(best, value, ranges, f, options.refine_sweeps);
  ScalingFitResult out;
  out.method = CollapseMethod::power_law;
  out.gamma_c = best[0];
  out.beta = best[1];
  out.nu = best[2];
  out.residual = value;
  out.points_used = total_points(family);
  out.at_boundary = on_boundary<3>(best, ranges);
  return out;
}

// --------------------------------------------------------------- size fits

namespace {

struct LinearSolve {
  double a = 0.0;
  double b = 0.0;
  double residual = kInf;
};

// Least squares v = a f + b.
LinearSolve fit_affine(const std::vector<double>& f, std::span<const double> v) {
  const auto n = static_cast<double>(f.size());
  double mf = 0.0, mv = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    mf += f[i];
    mv += v[i];
  }
  mf /= n;
  mv /= n;
  double sff = 0.0, sfv = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    sff += (f[i] - mf) * (f[i] - mf);
    sfv += (f[i] - mf) * (v[i] - mv);
  }
  LinearSolve out;
  if (!(sff > 1e-300)) return out;
  out.a = sfv / sff;
  out.b = mv - out.a * mf;
  double r = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = v[i] - (out.a * f[i] + out.b);
    r += d * d;
  }
  out.residual = r;
  return out;
}

}  // namespace

PowerLawFit power_law_fit(std::span<const double> sizes, std::span<const double> values) {
  if (sizes.size() != values.size()) throw FitError("sizes and values differ in length");
  if (sizes.size() < 4) throw FitError("power-law fit needs at least 4 sizes");
  for (double L : sizes) {
    if (!(L > 0.0)) throw FitError("sizes must be positive");
  }
  const std::size_t n = sizes.size();
  PowerLawFit out;

  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(n);
  double spread = 0.0;
  for (double v : values) spread = std::max(spread, std::abs(v - mean));
  if (spread <= 1e-12 * std::max(1.0, std::abs(mean))) {
    out.a = 0.0;
    out.mu = 0.0;
    out.b = mean;
    out.identifiable = false;
    return out;
  }

  std::vector<double> logL(n);
  for (std::size_t i = 0; i < n; ++i) logL[i] = std::log(sizes[i]);
  std::vector<double> basis(n);
  auto solve = [&](double mu) {
    for (std::size_t i = 0; i < n; ++i) basis[i] = std::exp(mu * logL[i]);
    return fit_affine(basis, values);
  };
  auto residual = [&](double mu) { return solve(mu).residual; };

  // Starting exponent from successive differences: dv ~ L^(mu - 1) dL.
  double mu0 = 0.0;
  {
    std::vector<double> lx, ly;
    bool same_sign = true;
    const double first = values[1] - values[0];
    for (std::size_t i = 0; i + 1 < n; ++i) {
      const double dv = values[i + 1] - values[i];
      const double dL = sizes[i + 1] - sizes[i];
      if (dv == 0.0 || (dv > 0.0) != (first > 0.0) || dL <= 0.0) {
        same_sign = false;
        break;
      }
      lx.push_back(0.5 * (logL[i] + logL[i + 1]));
      ly.push_back(std::log(std::abs(dv) / dL));
    }
    if (same_sign && lx.size() >= 2) {
      const LinearSolve s = fit_affine(lx, ly);
      if (std::isfinite(s.residual)) mu0 = s.a + 1.0;
    }
  }

  double best_mu = mu0;
  double best_r = residual(mu0);
  const double step = 0.01;
  for (int k = -400; k <= 400; ++k) {
    const double mu = k * step;
    const double r = residual(mu);
    if (r < best_r) {
      best_r = r;
      best_mu = mu;
    }
  }
  double refined_r = kInf;
  const double mu = golden_section(residual, best_mu - step, best_mu + step, refined_r, 80);
  if (refined_r < best_r) {
    best_mu = mu;
    best_r = refined_r;
  }
  if (!std::isfinite(best_r)) throw FitError("power-law fit did not converge");

  const LinearSolve s = solve(best_mu);
  out.a = s.a;
  out.mu = best_mu;
  out.b = s.b;
  out.residual = s.residual;

  // Linearised parameter errors.
  Eigen::MatrixXd J(static_cast<Eigen::Index>(n), 3);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = std::exp(best_mu * logL[i]);
    J(static_cast<Eigen::Index>(i), 0) = p;
    J(static_cast<Eigen::Index>(i), 1) = out.a * p * logL[i];
    J(static_cast<Eigen::Index>(i), 2) = 1.0;
  }
  if (n > 3) {
    const double sigma2 = out.residual / static_cast<double>(n - 3);
    const Eigen::MatrixXd jtj = J.transpose() * J;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
    if (lu.isInvertible()) {
      const Eigen::MatrixXd cov = sigma2 * lu.inverse();
      out.a_error = std::sqrt(std::max(0.0, cov(0, 0)));
      out.mu_error = std::sqrt(std::max(0.0, cov(1, 1)));
      out.b_error = std::sqrt(std::max(0.0, cov(2, 2)));
    }
  }
  out.identifiable = std::abs(out.a) > 1e-12 * std::max(1.0, std::abs(out.b));
  return out;
}

LogFit log_fit(std::span<const double> sizes, std::span<const double> values) {
  if (sizes.size() != values.size()) throw FitError("sizes and values differ in length");
  if (sizes.size() < 3) throw FitError("logarithmic fit needs at least 3 sizes");
  std::vector<double> logL;
  for (double L : sizes) {
    if (!(L > 0.0)) throw FitError("sizes must be positive");
    logL.push_back(std::log(L));
  }
  const LinearSolve s = fit_affine(logL, values);
  if (!std::isfinite(s.residual)) throw FitError("all sizes are equal");
  return {s.a, s.b, s.residual};
}

}  // namespace lrmip
