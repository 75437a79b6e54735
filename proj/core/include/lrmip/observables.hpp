#pragma once

#include <vector>

#include "lrmip/gaussian.hpp"

namespace lrmip {

// S_l in bits for l = 1..L/2 (index 0 holds l = 1), with optional errors.
struct EntanglementProfile {
  int L = 0;
  std::vector<double> values;
  std::vector<double> errors;

  double at(int ell) const { return values.at(static_cast<std::size_t>(ell - 1)); }
};

// Each S_l from the l x l leading block of the correlation matrix.
EntanglementProfile entanglement_profile(const GaussianState& state);

// Region boundaries of the a|b|c|d partition: a = [0, L/8), b = [L/8, L/2),
// c = [L/2, 5L/8), d = [5L/8, L).
struct QuarterPartition {
  int a_begin, a_end, c_begin, c_end;
};
QuarterPartition quarter_partition(int L);

// I = S_a + S_c - S_ac for the a/c regions above. Throws PartitionError when
// L is not divisible by 8.
double mutual_information_quarters(const GaussianState& state);

// I between site 0 and the antipodal site L/2.
double mutual_information_far_sites(const GaussianState& state);

// Mutual information between two disjoint site sets.
double mutual_information(const GaussianState& state, const std::vector<int>& a,
                          const std::vector<int>& c);

struct CftFit {
  double c_eff = 0.0;
  double constant = 0.0;
  double r_squared = 0.0;
  double c_eff_error = 0.0;  // 3 x standard error of the slope
  int points = 0;
};

// Chord coordinate log2[(L/pi) sin(pi l / L)].
double chord_log2(int L, int ell);

// Least squares S_l = (c/3) chord_log2(L, l) + const over l in [ell_lo, ell_hi].
// Throws FitError for fewer than 4 points or a degenerate window.
CftFit cft_fit(const EntanglementProfile& profile, int ell_lo, int ell_hi);
// Default window [3L/8, L/2].
CftFit cft_fit(const EntanglementProfile& profile);

}  // namespace lrmip
