#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "lrmip/errors.hpp"
#include "lrmip/gaussian.hpp"
#include "reference.hpp"

using namespace lrmip;

namespace {

GaussianState state_from(const Eigen::MatrixXcd& u) {
  GaussianState s;
  s.u = u;
  return s;
}

std::vector<int> range(int begin, int end) {
  std::vector<int> v(static_cast<std::size_t>(end - begin));
  std::iota(v.begin(), v.end(), begin);
  return v;
}

}  // namespace

TEST_SUITE("gaussian") {
  TEST_CASE("Neel state") {
    const GaussianState s = neel_state(LatticeSpec::make(4, 1.0));
    CHECK(s.u.cols() == 2);
    CHECK(s.u(0, 0) == ref::cdouble(1.0));
    CHECK(s.u(2, 1) == ref::cdouble(1.0));
    const Eigen::VectorXd n = s.occupations();
    CHECK(n(0) == 1.0);
    CHECK(n(1) == 0.0);
    CHECK(n(2) == 1.0);
    CHECK(n(3) == 0.0);
    CHECK(neel_state(LatticeSpec::make(2, 1.0)).u.cols() == 1);
    const GaussianState big = neel_state(LatticeSpec::make(12, 1.0));
    for (int ell = 1; ell < 12; ++ell) CHECK(region_entropy(big, range(0, ell)) == doctest::Approx(0.0));
    CHECK_THROWS_AS(neel_state(LatticeSpec::make(4, 1.0, 1)), ConfigError);
  }

  TEST_CASE("correlation matrix examples") {
    const GaussianState neel = neel_state(LatticeSpec::make(4, 1.0));
    const std::vector<int> sites{0, 1};
    const CorrelationMatrix c = correlation_matrix(neel, sites);
    CHECK(c.D(0, 0) == ref::cdouble(1.0));
    CHECK(c.D(1, 1) == ref::cdouble(0.0));
    CHECK(std::abs(c.D(0, 1)) == 0.0);

    Eigen::MatrixXcd u(2, 1);
    u << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
    const CorrelationMatrix half = full_correlation_matrix(state_from(u));
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) CHECK(std::abs(half.D(i, j) - 0.5) < 1e-15);
    }
    const std::vector<int> dup{1, 1};
    CHECK_THROWS_AS(correlation_matrix(neel, dup), DomainError);
    CHECK_THROWS_AS(correlation_matrix(neel, std::vector<int>{}), DomainError);
  }

  TEST_CASE("correlation matrix is <c_i^dag c_j> for complex orbitals") {
    Eigen::MatrixXcd u(2, 1);
    u << 1.0 / std::sqrt(2.0), ref::cdouble(0.0, 1.0 / std::sqrt(2.0));
    const CorrelationMatrix c = full_correlation_matrix(state_from(u));
    CHECK(std::abs(c.D(0, 1) - std::conj(u(0, 0)) * u(1, 0)) < 1e-15);
  }

  TEST_CASE("random orbitals give a rank-N projector with trace N") {
    const Eigen::MatrixXcd u = ref::random_orbitals(9, 4, 11);
    const Eigen::MatrixXcd D = full_correlation_matrix(state_from(u)).D;
    CHECK(std::abs(D.trace() - 4.0) < 1e-12);
    CHECK((D * D - D).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((D - D.adjoint()).cwiseAbs().maxCoeff() < 1e-15);
  }

  TEST_CASE("entropy examples") {
    Eigen::MatrixXcd d(2, 2);
    d << 1.0, 0.0, 0.0, 0.0;
    CHECK(entanglement_entropy(d) == doctest::Approx(0.0));
    Eigen::MatrixXcd h(1, 1);
    h << 0.5;
    CHECK(entanglement_entropy(h) == doctest::Approx(1.0));
    Eigen::MatrixXcd two(2, 2);
    two << 0.5, 0.0, 0.0, 0.5;
    CHECK(entanglement_entropy(two) == doctest::Approx(2.0));
    Eigen::MatrixXcd bad(1, 1);
    bad << 1.1;
    CHECK_THROWS_AS(entanglement_entropy(bad), NumericalError);
    Eigen::MatrixXcd slightly(1, 1);
    slightly << 1.0 + 1e-9;
    CHECK(entanglement_entropy(slightly) == doctest::Approx(0.0));
  }

  TEST_CASE("entropy from eigenvalues matches the binary entropy sum") {
    const Eigen::MatrixXcd u = ref::random_orbitals(10, 5, 3);
    const GaussianState s = state_from(u);
    for (int ell = 1; ell <= 5; ++ell) {
      const std::vector<int> A = range(0, ell);
      const Eigen::MatrixXcd D = correlation_matrix(s, A).D;
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(D);
      double expected = 0.0;
      for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        expected += ref::binary_entropy_bits(std::clamp(es.eigenvalues()(k), 0.0, 1.0));
      }
      CHECK(entanglement_entropy(correlation_matrix(s, A)) == doctest::Approx(expected).epsilon(1e-12));
      CHECK(region_entropy(s, A) == doctest::Approx(expected).epsilon(1e-10));
    }
  }

  TEST_CASE("entropy bounds and complement symmetry") {
    const GaussianState s = state_from(ref::random_orbitals(10, 4, 5));
    for (int ell = 1; ell < 10; ++ell) {
      const double a = region_entropy(s, range(0, ell));
      const double b = region_entropy(s, range(ell, 10));
      CHECK(a == doctest::Approx(b).epsilon(1e-8));
      CHECK(a >= 0.0);
      CHECK(a <= std::min({ell, 4, 10 - ell}) + 1e-9);
    }
  }

  TEST_CASE("orthonormalize") {
    const Eigen::MatrixXcd u = ref::random_orbitals(8, 4, 9);
    const GaussianState same = orthonormalize(state_from(u));
    CHECK((same.u * same.u.adjoint() - u * u.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(orthonormalize(state_from(2.0 * u)).orthonormality_defect() < 1e-12);
    const GaussianState scaled = orthonormalize(state_from(2.0 * u));
    CHECK((scaled.u * scaled.u.adjoint() - u * u.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

    std::mt19937_64 rng(17);
    std::normal_distribution<double> g;
    Eigen::MatrixXcd raw(8, 4);
    for (Eigen::Index i = 0; i < 8; ++i) {
      for (Eigen::Index k = 0; k < 4; ++k) raw(i, k) = ref::cdouble(g(rng), g(rng));
    }
    const GaussianState q = orthonormalize(state_from(raw));
    CHECK((q.u.adjoint() * q.u - Eigen::MatrixXcd::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
    const Eigen::MatrixXcd gs = ref::gram_schmidt(raw);
    CHECK((q.u * q.u.adjoint() - gs * gs.adjoint()).cwiseAbs().maxCoeff() < 1e-10);

    Eigen::MatrixXcd deficient = raw;
    deficient.col(3) = deficient.col(0);
    CHECK_THROWS_AS(orthonormalize(state_from(deficient)), DegenerateStateError);
  }
}
