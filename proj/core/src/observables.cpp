#include "lrmip/observables.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "lrmip/errors.hpp"

namespace lrmip {

EntanglementProfile entanglement_profile(const GaussianState& state) {
  const int L = state.sites();
  const int half = L / 2;
  EntanglementProfile profile;
  profile.L = L;
  profile.values.reserve(static_cast<std::size_t>(half));
  const Eigen::MatrixXcd rows = state.u.topRows(half);
  const Eigen::MatrixXcd P = rows * rows.adjoint();
  for (int ell = 1; ell <= half; ++ell) {
    profile.values.push_back(entanglement_entropy(Eigen::MatrixXcd(P.topLeftCorner(ell, ell))));
  }
  profile.errors.assign(profile.values.size(), 0.0);
  return profile;
}

QuarterPartition quarter_partition(int L) {
  if (L <= 0 || L % 8 != 0) {
    throw PartitionError("quarter partition needs L divisible by 8, got " + std::to_string(L));
  }
  const int eighth = L / 8;
  return {0, eighth, L / 2, L / 2 + eighth};
}

namespace {

std::vector<int> range(int begin, int end) {
  std::vector<int> v(static_cast<std::size_t>(end - begin));
  std::iota(v.begin(), v.end(), begin);
  return v;
}

}  // namespace

double mutual_information(const GaussianState& state, const std::vector<int>& a,
                          const std::vector<int>& c) {
  std::vector<int> ac = a;
  ac.insert(ac.end(), c.begin(), c.end());
  return region_entropy(state, a) + region_entropy(state, c) - region_entropy(state, ac);
}

double mutual_information_quarters(const GaussianState& state) {
  const QuarterPartition p = quarter_partition(state.sites());
  return mutual_information(state, range(p.a_begin, p.a_end), range(p.c_begin, p.c_end));
}

double mutual_information_far_sites(const GaussianState& state) {
  const int L = state.sites();
  if (L % 2 != 0) throw PartitionError("far-site mutual information needs even L");
  return mutual_information(state, {0}, {L / 2});
}

double chord_log2(int L, int ell) {
  return std::log2(L / std::numbers::pi * std::sin(std::numbers::pi * ell / L));
}

CftFit cft_fit(const EntanglementProfile& profile, int ell_lo, int ell_hi) {
  const int half = profile.L / 2;
  if (ell_lo < 1 || ell_hi > half || ell_lo > ell_hi) {
    throw FitError("fit window must lie inside [1, L/2]");
  }
  const int n = ell_hi - ell_lo + 1;
  if (n < 4) throw FitError("fit window needs at least 4 points");
  Eigen::VectorXd x(n), y(n);
  for (int k = 0; k < n; ++k) {
    x(k) = chord_log2(profile.L, ell_lo + k);
    y(k) = profile.at(ell_lo + k);
  }
  const double mx = x.mean();
  const double my = y.mean();
  const double sxx = (x.array() - mx).square().sum();
  if (!(sxx > 1e-14 * std::max(1.0, mx * mx))) throw FitError("degenerate fit window");
  const double sxy = ((x.array() - mx) * (y.array() - my)).sum();
  const double slope = sxy / sxx;
  CftFit fit;
  fit.points = n;
  fit.c_eff = 3.0 * slope;
  fit.constant = my - slope * mx;
  const double ss_res = (y.array() - (fit.constant + slope * x.array())).square().sum();
  const double ss_tot = (y.array() - my).square().sum();
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  fit.c_eff_error = n > 2 ? 3.0 * std::sqrt(ss_res / (n - 2) / sxx) : 0.0;
  return fit;
}

CftFit cft_fit(const EntanglementProfile& profile) {
  return cft_fit(profile, (3 * profile.L) / 8, profile.L / 2);
}

}  // namespace lrmip
