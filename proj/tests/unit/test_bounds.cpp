#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lrmip/bounds.hpp"
#include "lrmip/errors.hpp"
#include "lrmip/oracle.hpp"
#include "lrmip/trajectory.hpp"
#include "reference.hpp"

using namespace lrmip;

namespace {

// Extreme eigenvalue of the bilinear over the whole 2^L Fock space, built
// here sector by sector from explicit fermionic sign counting.
double brute_force_fock_norm(const Eigen::MatrixXd& t) {
  const int L = static_cast<int>(t.rows());
  const std::uint32_t dim = 1u << L;
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(dim, dim);
  for (std::uint32_t s = 0; s < dim; ++s) {
    for (int i = 0; i < L; ++i) {
      for (int j = 0; j < L; ++j) {
        if (t(i, j) == 0.0) continue;
        if (!(s >> j & 1u)) continue;
        std::uint32_t m = s & ~(1u << j);
        int sign = __builtin_popcount(m & ((1u << j) - 1u)) % 2 ? -1 : 1;
        if (m >> i & 1u) continue;
        sign *= __builtin_popcount(m & ((1u << i) - 1u)) % 2 ? -1 : 1;
        m |= 1u << i;
        H(m, s) += sign * t(i, j);
      }
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

double surface(int d) { return d == 2 ? 2.0 : 2.0 * std::numbers::pi; }

double growth(double half, double e) {
  if (std::abs(e) < 1e-12) return 1.0 + std::log(half);
  return 1.0 + (std::pow(half, e) - 1.0) / e;
}

}  // namespace

TEST_SUITE("bounds") {
  TEST_CASE("nuclear norm equals the Fock-space extreme eigenvalue") {
    for (int L : {2, 4, 6, 8}) {
      for (double a : {0.0, 0.5, 1.0, 2.0, 1000.0}) {
        const LatticeSpec spec = LatticeSpec::make(L, a);
        for (int ell = 1; ell <= L / 2; ++ell) {
          const BoundaryBlock b = build_boundary_block(spec, ell);
          CHECK(std::abs(bilinear_norm(b) - brute_force_fock_norm(b.embedded())) < 1e-9);
          if (L <= 6) CHECK(std::abs(bilinear_norm(b) - fock_space_norm(b.embedded())) < 1e-9);
        }
      }
    }
  }

  TEST_CASE("norm examples") {
    CHECK(bilinear_norm(build_boundary_block(LatticeSpec::make(4, 1000.0), 2)) == doctest::Approx(2.0));
    BoundaryBlock zero;
    zero.M = Eigen::MatrixXd::Zero(3, 3);
    zero.ell = 3;
    zero.L = 6;
    CHECK(bilinear_norm(zero) == 0.0);
    const BoundaryBlock b = build_boundary_block(LatticeSpec::make(8, 1.0), 4);
    CHECK(std::abs(bilinear_norm(b) - fock_space_norm(b.embedded())) < 1e-9);
  }

  TEST_CASE("norm is non-decreasing in L up to alpha = 2") {
    for (double a : {0.5, 1.2, 1.6, 2.0}) {
      double prev = 0.0;
      for (int L : {8, 16, 32, 64, 128, 256, 512}) {
        const double n = bilinear_norm(build_boundary_block(LatticeSpec::make(L, a), L / 2));
        CHECK(n >= prev);
        prev = n;
      }
    }
  }

  TEST_CASE("norm at alpha = 3 saturates with a slight decrease") {
    // Past saturation the norm drifts down by a few parts in 1e5.
    const auto norm = [](int L) { return bilinear_norm(build_boundary_block(LatticeSpec::make(L, 3.0), L / 2)); };
    CHECK(norm(64) > norm(128));
    CHECK(norm(128) > norm(512));
    CHECK((norm(64) - norm(1024)) / norm(64) < 1e-4);
  }

  TEST_CASE("norm scaling classification") {
    const std::vector<int> sizes{64, 128, 256, 512};
    const NormScalingSeries fast = norm_scaling_series(0.5, sizes);
    CHECK(fast.classification == NormScaling::power);
    CHECK(fast.norms.size() == 4);
    const NormScalingSeries slow = norm_scaling_series(3.0, sizes);
    CHECK(slow.classification == NormScaling::bounded);
    CHECK(slow.growth_ratio < kBoundedRatio);
    CHECK(to_string(NormScaling::logarithmic) == "logarithmic");
  }

  TEST_CASE("bilinear bound in one dimension") {
    const BoundParameters p{2.0, 1, 1.0};
    double lattice = 0.0;
    double printed = 0.0;
    for (int x = 1; x <= 32; ++x) {
      double a = 0.0;
      double b = 0.0;
      for (int y = 1; y <= 32; ++y) {
        a += 1.0 / std::pow(x + y - 1.0, 4.0);
        b += 1.0 / std::pow(x + y, 4.0);
      }
      lattice += std::sqrt(a);
      printed += std::sqrt(b);
    }
    CHECK(lemma1_bound_bilinear(p, 64) == doctest::Approx(4.0 * lattice).epsilon(1e-12));
    CHECK(lemma1_bound_bilinear(p, 64, DepthConvention::printed) == doctest::Approx(4.0 * printed).epsilon(1e-12));
    CHECK(std::isfinite(lemma1_bound_bilinear(p, 64)));
    double prev = lemma1_bound_bilinear(p, 64);
    for (double a : {2.5, 3.0, 4.0}) {
      const double v = lemma1_bound_bilinear({a, 1, 1.0}, 64);
      CHECK(v < prev);
      prev = v;
    }
    CHECK_THROWS_AS(lemma1_bound_bilinear({0.4, 1, 1.0}, 64), DomainError);
    CHECK_THROWS_AS(lemma1_bound_bilinear({1.0, 2, 1.0}, 64), DomainError);
  }

  TEST_CASE("bilinear bound dominates the lattice norm") {
    for (double a : {1.6, 2.0, 2.5, 3.0}) {
      for (int L : {64, 128, 256, 512, 1024}) {
        const double norm = bilinear_norm(build_boundary_block(LatticeSpec::make(L, a), L / 2));
        CHECK(norm <= lemma1_bound_bilinear({a, 1, 1.0}, L));
      }
    }
  }

  TEST_CASE("higher-dimensional closed forms") {
    for (int d : {2, 3}) {
      for (double a : {1.7, 2.4, 3.5}) {
        if (!(2.0 * a > d)) continue;
        const double B = ref::beta_quadrature(0.5 * d - 0.5, a + 0.5 - 0.5 * d);
        const double e = -a + 0.5 * d + 1.0;
        for (int L : {8, 64, 1024}) {
          const double expected = 4.0 * std::sqrt(surface(d) * B / 2.0 / (2.0 * a - d)) * growth(L / 2, e);
          CHECK(lemma1_bound_bilinear({a, d, 1.0}, L) == doctest::Approx(expected).epsilon(1e-6));
        }
      }
      for (double a : {3.2, 4.5}) {
        const double B = ref::beta_quadrature(0.5 * (d - 1.0), 0.5 * (a - d + 1.0));
        const double e = -a + d + 1.0;
        for (int L : {8, 64, 1024}) {
          const double expected = surface(d) * B / (2.0 * (a - d)) * growth(L / 2, e);
          CHECK(lemma1_bound_interacting({a, d, 1.0}, L) == doctest::Approx(expected).epsilon(1e-6));
        }
      }
    }
  }

  TEST_CASE("beta function values") {
    CHECK(ref::beta_quadrature(0.5, 0.5) == doctest::Approx(std::numbers::pi).epsilon(1e-6));
    CHECK(ref::beta_quadrature(1.0, 3.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-9));
    CHECK(ref::beta_quadrature(2.0, 2.0) == doctest::Approx(1.0 / 6.0).epsilon(1e-7));
  }

  TEST_CASE("interacting bound in one dimension") {
    const double v = lemma1_bound_interacting({3.0, 1, 1.0}, 100);
    CHECK(v == doctest::Approx(0.5 + (1.0 / 50.0 - 1.0) / (2.0 * -1.0)).epsilon(1e-12));
    CHECK(v == doctest::Approx(0.99).epsilon(1e-12));
    CHECK(interacting_double_sum(3.0, 100) <= v);
    CHECK(lemma1_bound_interacting({3.0, 1, 2.0}, 100) == doctest::Approx(2.0 * v));
    double prev = lemma1_bound_interacting({1.5, 1, 1.0}, 200);
    for (double a : {2.0, 3.0, 6.0, 20.0, 100.0}) {
      const double w = lemma1_bound_interacting({a, 1, 1.0}, 200);
      CHECK(w < prev);
      CHECK(w >= interacting_double_sum(a, 200));
      prev = w;
    }
    CHECK(lemma1_bound_interacting({1e6, 1, 1.0}, 200) < 1e-5);
    CHECK_THROWS_AS(lemma1_bound_interacting({1.0, 1, 1.0}, 100), DomainError);
    CHECK_THROWS_AS(lemma1_bound_interacting({2.0, 2, 1.0}, 100), DomainError);
  }

  TEST_CASE("interacting bound growth below and above the threshold") {
    double prev_below = 0.0;
    double prev_above = 0.0;
    const double limit_above = lemma1_bound_interacting({3.1, 2, 1.0}, 1 << 30);
    for (int L : {8, 16, 64, 256, 1024}) {
      const double below = lemma1_bound_interacting({2.9, 2, 1.0}, L);
      const double above = lemma1_bound_interacting({3.1, 2, 1.0}, L);
      CHECK(below > prev_below);
      CHECK(above >= prev_above);
      CHECK(above < limit_above);
      prev_below = below;
      prev_above = above;
    }
    CHECK(lemma1_bound_interacting({2.9, 2, 1.0}, 1 << 30) > 5.0 * lemma1_bound_interacting({2.9, 2, 1.0}, 1024));
  }

  TEST_CASE("thresholds") {
    CHECK(classify_threshold(1, CouplingFamily::bilinear) == 1.5);
    CHECK(classify_threshold(1, CouplingFamily::interacting) == 2.0);
    CHECK(classify_threshold(3, CouplingFamily::bilinear) == 2.5);
    for (int d : {1, 2, 3}) {
      const double b = classify_threshold(d, CouplingFamily::bilinear);
      CHECK(bilinear_bound_exponent(d, b) == doctest::Approx(0.0));
      CHECK(bilinear_bound_exponent(d, b - 0.1) > 0.0);
      CHECK(bilinear_bound_exponent(d, b + 0.1) < 0.0);
      const double i = classify_threshold(d, CouplingFamily::interacting);
      CHECK(interacting_bound_exponent(d, i) == doctest::Approx(0.0));
      CHECK(interacting_bound_exponent(d, i - 0.1) > 0.0);
      CHECK(interacting_bound_exponent(d, i + 0.1) < 0.0);
    }
    CHECK_THROWS_AS(classify_threshold(4, CouplingFamily::bilinear), DomainError);
  }

  TEST_CASE("growth rate vanishes for the Neel state") {
    const LatticeSpec spec = LatticeSpec::make(6, 1.5);
    const DenseState neel = dense_neel_state(spec);
    const GrowthRateReport r = growth_rate_lambda(neel, build_boundary_block(spec, 3), 3);
    CHECK(std::abs(r.lambda) < 1e-12);
    CHECK(std::abs(r.lambda_log) < 1e-6);
    CHECK(std::abs(r.sdot_literal) < 1e-12);
  }

  TEST_CASE("growth rate is invariant under a global phase") {
    const LatticeSpec spec = LatticeSpec::make(6, 1.5);
    const FockSector H = dense_hamiltonian(spec);
    const DenseState psi = dense_evolve(dense_neel_state(spec), H, 0.8);
    DenseState rotated = psi;
    rotated.amplitudes() *= std::polar(1.0, 0.937);
    const BoundaryBlock b = build_boundary_block(spec, 3);
    const GrowthRateReport a = growth_rate_lambda(psi, b, 3);
    const GrowthRateReport c = growth_rate_lambda(rotated, b, 3);
    CHECK(std::abs(a.lambda - c.lambda) < 1e-12);
    CHECK(std::abs(a.lambda_log - c.lambda_log) < 1e-10);
  }

  TEST_CASE("log variant with a sign flip reproduces the finite-difference rate") {
    const LatticeSpec spec = LatticeSpec::make(6, 1.5);
    const FockSector H = dense_hamiltonian(spec);
    const DenseState psi = dense_evolve(dense_neel_state(spec), H, 0.8);
    const GrowthRateReport r = growth_rate_lambda(psi, build_boundary_block(spec, 3), 3, &H);
    CHECK(std::isfinite(r.sdot_finite_difference));
    CHECK(std::abs(r.sdot_finite_difference) > 1e-3);
    CHECK(std::abs(r.sdot_log.imag()) < 1e-9);
    CHECK(std::abs(-r.sdot_log.real() - r.sdot_finite_difference) < 1e-6);
    CHECK(std::abs(r.sdot_literal.real() - r.sdot_finite_difference) > 1e-3);
    CHECK(r.matching_variant == "log (opposite sign)");
  }

  TEST_CASE("growth rate input checks") {
    const LatticeSpec spec = LatticeSpec::make(6, 1.5);
    const DenseState neel = dense_neel_state(spec);
    CHECK_THROWS_AS(growth_rate_lambda(neel, build_boundary_block(spec, 2), 3), DomainError);
    DenseState unnormalised = neel;
    unnormalised.amplitudes() *= 2.0;
    CHECK_THROWS_AS(growth_rate_lambda(unnormalised, build_boundary_block(spec, 3), 3), DomainError);
  }
}
