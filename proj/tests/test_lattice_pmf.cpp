#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "skewwalk/lattice_pmf.hpp"

using Catch::Approx;
using namespace skewwalk;

namespace {
const double kAlphaGrid[] = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
}

TEST_CASE("skew parameter rejects values outside (0,1)") {
  REQUIRE_THROWS_AS(SkewParam(0.0), std::domain_error);
  REQUIRE_THROWS_AS(SkewParam(1.0), std::domain_error);
  REQUIRE_THROWS_AS(SkewParam(-0.2), std::domain_error);
  REQUIRE_THROWS_AS(SkewParam(1.5), std::domain_error);
  REQUIRE_THROWS_AS(SkewParam(std::nan("")), std::domain_error);
  REQUIRE(SkewParam(0.7).alpha() == 0.7);
}

TEST_CASE("one kernel step from the origin splits alpha up") {
  const LatticePmf next = step(LatticePmf::delta(0), SkewParam(0.7));
  REQUIRE(next.step_index() == 1);
  REQUIRE(next.prob(1) == Approx(0.7).margin(1e-15));
  REQUIRE(next.prob(-1) == Approx(0.3).margin(1e-15));
  REQUIRE(next.prob(0) == 0.0);
}

TEST_CASE("one kernel step off the origin is a fair coin") {
  LatticePmf at5(5, {1.0}, 5);  // all mass at m = 5 after 5 steps
  for (double a : {0.2, 0.7, 0.99}) {
    const LatticePmf next = step(at5, SkewParam(a));
    REQUIRE(next.prob(4) == 0.5);
    REQUIRE(next.prob(6) == 0.5);
  }
}

TEST_CASE("alpha = 1/2 reproduces the simple symmetric walk") {
  const LatticePmf next = step(LatticePmf::delta(0), SkewParam(0.5));
  REQUIRE(next.prob(1) == 0.5);
  REQUIRE(next.prob(-1) == 0.5);
}

TEST_CASE("two-step law matches the four-path enumeration") {
  const LatticePmf pmf = exact_pmf(SkewParam(0.7), 2);
  REQUIRE(pmf.prob(-2) == Approx(0.15).margin(1e-15));
  REQUIRE(pmf.prob(0) == Approx(0.5).margin(1e-15));
  REQUIRE(pmf.prob(2) == Approx(0.35).margin(1e-15));
}

TEST_CASE("zero steps is the point mass at the origin") {
  const LatticePmf pmf = exact_pmf(SkewParam(0.3), 0);
  REQUIRE(pmf.prob(0) == 1.0);
  REQUIRE(pmf.step_index() == 0);
}

TEST_CASE("the origin mass after two steps is g(2) = 1/2 for every alpha") {
  for (double a : kAlphaGrid)
    REQUIRE(exact_pmf(SkewParam(a), 2).prob(0) == Approx(0.5).margin(1e-14));
}

TEST_CASE("reflected law by folding") {
  const LatticePmf r0 = reflected_pmf(0);
  REQUIRE(r0.prob(0) == 1.0);
  const LatticePmf r1 = reflected_pmf(1);
  REQUIRE(r1.prob(1) == 1.0);
  const LatticePmf r2 = reflected_pmf(2);
  REQUIRE(r2.prob(0) == Approx(0.5).margin(1e-15));
  REQUIRE(r2.prob(2) == Approx(0.5).margin(1e-15));
}

TEST_CASE("factorized law equals the evolved law") {
  const LatticePmf fac = factorized_pmf(SkewParam(0.7), 2);
  REQUIRE(fac.prob(-2) == Approx(0.15).margin(1e-15));
  REQUIRE(fac.prob(0) == Approx(0.5).margin(1e-15));
  REQUIRE(fac.prob(2) == Approx(0.35).margin(1e-15));

  // alpha * P(|S_4| = 4) = 0.25 * 0.125
  const LatticePmf quarter = factorized_pmf(SkewParam(0.25), 4);
  REQUIRE(quarter.prob(4) == Approx(0.03125).margin(1e-15));

  for (long long k : {0LL, 1LL, 7LL, 64LL}) {
    const LatticePmf sym_exact = exact_pmf(SkewParam(0.5), k);
    const LatticePmf sym_fac = factorized_pmf(SkewParam(0.5), k);
    for (long long m = -k; m <= k; ++m)
      REQUIRE(sym_fac.prob(m) == Approx(sym_exact.prob(m)).margin(1e-13));
  }
}

TEST_CASE("factorization, folding, mirror and mass invariants on a grid") {
  constexpr long long kMax = 64;
  for (double a : kAlphaGrid) {
    const SkewParam p(a);
    const SkewParam q = p.mirrored();
    LatticePmf pmf = LatticePmf::delta(0);
    for (long long k = 0; k <= kMax; ++k) {
      if (k > 0) pmf = step(pmf, p);
      pmf.validate();
      const LatticePmf fac = factorized_pmf(p, k);
      const LatticePmf refl = reflected_pmf(k);
      const LatticePmf mirror = exact_pmf(q, k);
      for (long long m = -k; m <= k; ++m) {
        REQUIRE(std::abs(pmf.prob(m) - fac.prob(m)) <= 1e-12);
        REQUIRE(std::abs(pmf.prob(m) - mirror.prob(-m)) <= 1e-12);
        if (m > 0)
          REQUIRE(std::abs(pmf.prob(m) + pmf.prob(-m) - refl.prob(m)) <=
                  1e-12);
      }
      REQUIRE(std::abs(pmf.mass() - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("parity: off-parity lattice points carry no mass") {
  const LatticePmf pmf = exact_pmf(SkewParam(0.3), 9);
  for (long long m = -9; m <= 9; ++m)
    if (((m % 2) + 2) % 2 != 1) REQUIRE(pmf.prob(m) == 0.0);
}

TEST_CASE("exact law matches exhaustive path enumeration up to k = 12") {
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    for (int k : {1, 2, 3, 5, 8, 12}) {
      const auto brute = oracles::brute_pmf(a, k);
      const LatticePmf pmf = exact_pmf(SkewParam(a), k);
      for (long long m = -k; m <= k; ++m)
        REQUIRE(std::abs(pmf.prob(m) -
                         brute[static_cast<std::size_t>(m + k)]) <= 1e-12);
    }
  }
}

TEST_CASE("conditional increment moments come from the kernel") {
  const LatticePmf pmf = exact_pmf(SkewParam(0.7), 6);
  const auto m7 = conditional_increment_moments(pmf, SkewParam(0.7));
  REQUIRE(m7.mean_at_origin == Approx(0.4).margin(1e-15));
  REQUIRE(m7.mean_off_origin == 0.0);
  REQUIRE(m7.second_moment == Approx(1.0).margin(1e-15));

  const auto half =
      conditional_increment_moments(exact_pmf(SkewParam(0.5), 6), SkewParam(0.5));
  REQUIRE(half.mean_at_origin == 0.0);

  for (double a : kAlphaGrid) {
    const auto m = conditional_increment_moments(exact_pmf(SkewParam(a), 5),
                                                 SkewParam(a));
    REQUIRE(std::abs(m.mean_at_origin - (2.0 * a - 1.0)) <= 5e-16);
    REQUIRE(std::abs(m.second_moment - 1.0) <= 5e-16);
  }
}

TEST_CASE("oversized step counts raise a resource error") {
  REQUIRE_THROWS_AS(exact_pmf(SkewParam(0.5), kMaxExactSteps + 1),
                    resource_error);
}
