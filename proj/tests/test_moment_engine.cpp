#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "skewwalk/moment_engine.hpp"
#include "skewwalk/simulator.hpp"

using Catch::Approx;
using namespace skewwalk;

namespace {
double ssrw_fourth(long long d) {
  const double dd = static_cast<double>(d);
  return 3.0 * dd * dd - 2.0 * dd;
}
}  // namespace

TEST_CASE("single increments have unit fourth moment") {
  for (double a : {0.1, 0.5, 0.9})
    REQUIRE(fourth_moment_exact(SkewParam(a), 0, 1) ==
            Approx(1.0).margin(1e-14));
}

TEST_CASE("symmetric walk fourth moments have the closed form") {
  REQUIRE(fourth_moment_exact(SkewParam(0.5), 0, 2) == Approx(8.0).margin(1e-12));
  for (long long j : {0LL, 3LL, 17LL})
    for (long long d : {1LL, 2LL, 5LL, 16LL, 64LL})
      REQUIRE(fourth_moment_exact(SkewParam(0.5), j, j + d) ==
              Approx(ssrw_fourth(d)).margin(1e-9));
}

TEST_CASE("fourth moments match path enumeration") {
  REQUIRE(fourth_moment_exact(SkewParam(0.7), 1, 3) ==
          Approx(oracles::brute_fourth_moment(0.7, 1, 3)).epsilon(1e-12));
  const std::pair<int, int> windows[] = {{0, 10}, {1, 9}, {2, 12}, {5, 16}};
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9})
    for (auto [j, k] : windows)
      REQUIRE(fourth_moment_exact(SkewParam(a), j, k) ==
              Approx(oracles::brute_fourth_moment(a, j, k)).epsilon(1e-10));
}

TEST_CASE("fourth moments are mirror invariant") {
  const std::pair<int, int> windows[] = {{0, 7}, {3, 40}, {11, 64}};
  for (double a : {0.1, 0.25, 0.4})
    for (auto [j, k] : windows)
      REQUIRE(fourth_moment_exact(SkewParam(a), j, k) ==
              Approx(fourth_moment_exact(SkewParam(1.0 - a), j, k))
                  .epsilon(1e-10));
}

TEST_CASE("decomposition terms sum to the exact fourth moment") {
  for (double a : {0.1, 0.3, 0.5, 0.7, 0.9}) {
    const SkewParam p(a);
    const std::pair<int, int> windows[] = {{0, 1}, {0, 2}, {0, 4},
                                           {1, 5}, {3, 20}, {7, 71}};
    for (auto [j, k] : windows) {
      const auto terms = decomposition_terms(p, j, k);
      const double sum = terms[0] + terms[1] + terms[2] + terms[3];
      REQUIRE(sum ==
              Approx(fourth_moment_exact(p, j, k)).epsilon(1e-9));
    }
  }
}

TEST_CASE("decomposition cross terms vanish for the symmetric walk") {
  const auto terms = decomposition_terms(SkewParam(0.5), 2, 14);
  REQUIRE(terms[2] == Approx(0.0).margin(1e-12));
  REQUIRE(terms[3] == Approx(0.0).margin(1e-12));
}

TEST_CASE("decomposition diagonal counts the increments") {
  const auto terms = decomposition_terms(SkewParam(0.7), 0, 2);
  REQUIRE(terms[0] == 2.0);
  REQUIRE(terms[1] == 6.0);  // 3 d (d-1)
  const auto sum4 = decomposition_terms(SkewParam(0.7), 0, 4);
  REQUIRE(sum4[0] + sum4[1] + sum4[2] + sum4[3] ==
          Approx(oracles::brute_fourth_moment(0.7, 0, 4)).epsilon(1e-10));
}

TEST_CASE("interpolated path evaluation") {
  PathSample path;
  path.positions = {0, 1, 2};
  REQUIRE(interp_value(path, 4, 0.375) == Approx(0.75).margin(1e-15));
  REQUIRE(interp_value(path, 4, 0.0) == 0.0);
  REQUIRE(interp_value(path, 4, 0.5) == Approx(2.0 / 2.0).margin(1e-15));
  REQUIRE_THROWS_AS(interp_value(path, 4, 0.75), std::domain_error);
}

TEST_CASE("grid times reduce the interpolated moment to the grid one") {
  for (double a : {0.3, 0.7}) {
    const SkewParam p(a);
    const long long n = 16;
    const std::pair<int, int> windows[] = {{0, 5}, {2, 9}, {7, 16}};
    for (auto [j, k] : windows) {
      const double grid = fourth_moment_exact(p, j, k) /
                          (static_cast<double>(n) * static_cast<double>(n));
      const double interp = fourth_moment_interp(
          p, n, static_cast<double>(j) / n, static_cast<double>(k) / n);
      REQUIRE(interp == Approx(grid).epsilon(1e-11));
    }
  }
}

TEST_CASE("within one grid cell the moment is the quartic of the weight") {
  const long long n = 8;
  const double t = 1.0 / (2.0 * n);
  REQUIRE(fourth_moment_interp(SkewParam(0.7), n, 0.0, t) ==
          Approx(1.0 / (16.0 * n * n)).margin(1e-15));
}

TEST_CASE("interpolated moments match full path enumeration") {
  for (double a : {0.3, 0.7}) {
    const SkewParam p(a);
    const std::tuple<long long, double, double> cases[] = {
        {4, 0.3, 0.8}, {4, 0.1, 0.95}, {8, 0.26, 1.4},
        {16, 0.07, 0.81}, {4, 0.55, 0.8}};
    for (auto [n, s, t] : cases) {
      const double brute = oracles::brute_interp_fourth(a, n, s, t);
      REQUIRE(fourth_moment_interp(p, n, s, t) ==
              Approx(brute).epsilon(1e-10));
    }
  }
}

TEST_CASE("batch interpolation agrees with the single-query path") {
  const SkewParam p(0.7);
  std::vector<InterpQuery> queries;
  SplitMix64 rng(7, 99);
  for (int i = 0; i < 50; ++i) {
    const long long n = 8 + 8 * (i % 7);
    double s = rng.next_double() * 2.0;
    double t = rng.next_double() * 2.0;
    if (s > t) std::swap(s, t);
    if (s == t) continue;
    queries.push_back(InterpQuery{n, s, t});
  }
  const auto batch = fourth_moment_interp_batch(p, queries);
  for (std::size_t i = 0; i < queries.size(); ++i)
    REQUIRE(batch[i] == Approx(fourth_moment_interp(p, queries[i].n,
                                                    queries[i].s,
                                                    queries[i].t))
                            .epsilon(1e-11));
}

TEST_CASE("interpolated moments match a Monte Carlo estimate") {
  const SkewParam p(0.7);
  const long long n = 8;
  const double s = 0.3, t = 0.8;
  const double exact = fourth_moment_interp(p, n, s, t);
  // MC over 10^6 paths of the rescaled interpolated process
  const std::size_t reps = 1000000;
  const RngContract rng{2024, 55};
  CompensatedSum sum, sq;
  const std::size_t len = static_cast<std::size_t>(
      std::floor(n * t)) + 1;
  for (std::size_t r = 0; r < reps; ++r) {
    const PathSample path = sample_path_direct(p, len, rng, r * len);
    const double diff = interp_value(path, n, t) - interp_value(path, n, s);
    const double quad = diff * diff * diff * diff;
    sum.add(quad);
    sq.add(quad * quad);
  }
  const double mean = sum.value() / static_cast<double>(reps);
  const double var =
      (sq.value() - static_cast<double>(reps) * mean * mean) /
      (static_cast<double>(reps) - 1.0);
  const double stderr_mean = std::sqrt(var / static_cast<double>(reps));
  REQUIRE(std::abs(mean - exact) <= 3.0 * stderr_mean);
}

TEST_CASE("scan sups for the symmetric walk stay below 3") {
  const TightnessReport report =
      tightness_scan(SkewParam(0.5), {16, 64}, 1, ScanOptions{100, 0, 2});
  REQUIRE(report.rows.size() == 2);
  REQUIRE(report.rows[0].ratio == Approx(3.0 - 2.0 / 16.0).margin(1e-9));
  REQUIRE(report.rows[1].ratio == Approx(3.0 - 2.0 / 64.0).margin(1e-9));
  REQUIRE(report.c_alpha < 3.0);
  for (const TightnessRow& row : report.rows) {
    REQUIRE(row.nongrid_ratio <= report.c_alpha);
    REQUIRE(row.nongrid_ratio > 0.0);
  }
}

TEST_CASE("scan grid moments agree with the direct computation") {
  const SkewParam p(0.8);
  const TightnessReport report =
      tightness_scan(p, {48}, 1, ScanOptions{0, 0, 1});
  const TightnessRow& row = report.rows[0];
  const double direct = fourth_moment_exact(p, row.j, row.k) / (48.0 * 48.0);
  REQUIRE(row.fourth_moment == Approx(direct).epsilon(1e-10));
  // the reported ratio is the max over every pair; spot check a few pairs
  const std::pair<int, int> windows[] = {{0, 1}, {3, 17}, {11, 48}};
  for (auto [j, k] : windows) {
    const double moment = fourth_moment_exact(p, j, k);
    const double ratio =
        moment / (static_cast<double>(k - j) * static_cast<double>(k - j));
    REQUIRE(ratio <= report.rows[0].ratio + 1e-12);
  }
}

TEST_CASE("scan results are identical for any worker count") {
  const SkewParam p(0.3);
  const TightnessReport one =
      tightness_scan(p, {16, 32}, 1, ScanOptions{50, 9, 1});
  const TightnessReport two =
      tightness_scan(p, {16, 32}, 1, ScanOptions{50, 9, 2});
  REQUIRE(one.c_alpha == two.c_alpha);
  for (std::size_t i = 0; i < one.rows.size(); ++i) {
    REQUIRE(one.rows[i].ratio == two.rows[i].ratio);
    REQUIRE(one.rows[i].j == two.rows[i].j);
    REQUIRE(one.rows[i].k == two.rows[i].k);
    REQUIRE(one.rows[i].nongrid_ratio == two.rows[i].nongrid_ratio);
  }
}

TEST_CASE("scan argument validation") {
  REQUIRE_THROWS_AS(tightness_scan(SkewParam(0.5), {}, 1), std::domain_error);
  REQUIRE_THROWS_AS(tightness_scan(SkewParam(0.5), {0}, 1), std::domain_error);
  REQUIRE_THROWS_AS(tightness_scan(SkewParam(0.5), {16}, 0), std::domain_error);
  REQUIRE_THROWS_AS(tightness_scan(SkewParam(0.5), {kMaxScanSteps + 1}, 1),
                    resource_error);
}

TEST_CASE("grid pair and report plumbing") {
  REQUIRE_THROWS_AS(GridPair(8, 3, 3), std::domain_error);
  REQUIRE_THROWS_AS(GridPair(0, 0, 1), std::domain_error);
  const MomentReport report = moment_report(SkewParam(0.7), GridPair(8, 1, 5));
  const double sum = report.term_breakdown[0] + report.term_breakdown[1] +
                     report.term_breakdown[2] + report.term_breakdown[3];
  REQUIRE(sum == Approx(report.fourth_moment).epsilon(1e-9));
  REQUIRE(report.ratio ==
          Approx(report.fourth_moment /
                 ((report.pair.t() - report.pair.s()) *
                  (report.pair.t() - report.pair.s())))
              .epsilon(1e-12));
}
