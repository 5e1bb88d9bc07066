#include <doctest.h>

#include <random>

#include "fibered/checks.hpp"
#include "fibered/lp.hpp"
#include "fibered/transport.hpp"
#include "helpers.hpp"

using namespace fibered;
using namespace testing;

TEST_CASE("transportation simplex") {
  // 2x2 with an obvious optimum on the diagonal.
  const std::vector<double> s{0.5, 0.5}, d{0.5, 0.5}, c{0.0, 1.0, 1.0, 0.0};
  const auto sol = solve_transport(s, d, c);
  CHECK(sol.cost == doctest::Approx(0.0));
  CHECK(sol.plan[0] == doctest::Approx(0.5));
  // Degenerate supplies still balance.
  const std::vector<double> s2{0.2, 0.3, 0.5}, d2{0.5, 0.5}, c2{1, 2, 3, 1, 2, 5};
  const auto sol2 = solve_transport(s2, d2, c2);
  double total = 0.0;
  for (double g : sol2.plan) total += g;
  CHECK(total == doctest::Approx(1.0));
  // Brute force: the only free parameter is the amount a of row 2 sent to column 1.
  double best = 1e300;
  for (int k = 0; k <= 1000; ++k) {
    const double a = 0.3 * k / 1000.0;  // row 1 -> col 0
    for (int m = 0; m <= 100; ++m) {
      const double b = 0.2 * m / 100.0;  // row 0 -> col 0
      const double e = 0.5 - a - b;      // row 2 -> col 0
      if (e < -1e-12 || e > 0.5 + 1e-12) continue;
      best = std::min(best, b * 1 + (0.2 - b) * 2 + a * 3 + (0.3 - a) * 1 + e * 2 + (0.5 - e) * 5);
    }
  }
  CHECK(sol2.cost == doctest::Approx(best).epsilon(1e-9));
}

TEST_CASE("w2_fiber on discrete fibers") {
  CHECK(w2_fiber(DiscreteFiber::dirac(0.0), DiscreteFiber::dirac(1.0)) == doctest::Approx(1.0));
  const DiscreteFiber a({{-1.0, 0.2}, {0.5, 0.3}, {2.0, 0.5}});
  CHECK(w2_fiber(a, a) == 0.0);
  const DiscreteFiber b({{0.0, 0.6}, {1.5, 0.4}});
  CHECK(w2_fiber(a, b) == doctest::Approx(w2_lp_oracle(a, b)).epsilon(1e-9));
  // Hand value: couple -1 (0.2) and 0.5 (0.3) to 0, then 0.1 of 2.0 to 0 and 0.4 of 2.0 to 1.5.
  const double w2sq = 0.2 * 1.0 + 0.3 * 0.25 + 0.1 * 4.0 + 0.4 * 0.25;
  CHECK(w2_fiber(a, b) == doctest::Approx(std::sqrt(w2sq)).epsilon(1e-12));
}

TEST_CASE("LP oracle") {
  CHECK(w2_lp_oracle(DiscreteFiber::dirac(-2.0), DiscreteFiber::dirac(1.5)) == doctest::Approx(3.5));
  const DiscreteFiber a({{0.0, 0.5}, {1.0, 0.5}});
  CHECK(w2_lp_oracle(a, a) == doctest::Approx(0.0));
  std::mt19937_64 rng(7);
  for (int k = 0; k < 50; ++k) {
    const auto x = random_discrete(rng, 4), y = random_discrete(rng, 4);
    CHECK(w2_fiber(x, y) == doctest::Approx(w2_lp_oracle(x, y)).epsilon(1e-9));
  }
  std::vector<Atom> many;
  for (int k = 0; k < 60; ++k) many.push_back({static_cast<double>(k), 1.0 / 60});
  CHECK_THROWS_AS(w2_lp_oracle(DiscreteFiber(many), a), std::invalid_argument);
}

TEST_CASE("w2_fiber on densities matches the discrete limit") {
  const ThetaGrid tg(-1.0, 1.0, 2);
  // Uniform on [-1, 0] vs uniform on [0, 1]: W2 = 1 exactly.
  const FiberMeasure a(tg, {1.0, 0.0}), b(tg, {0.0, 1.0});
  CHECK(w2_fiber(a, b) == doctest::Approx(1.0).epsilon(1e-14));
  // Uniform on [-1, 0] vs a point mass at 0: int_0^1 (u - 1)^2 du = 1/3.
  CHECK(w2_fiber(a, DiscreteFiber::dirac(0.0)) == doctest::Approx(std::sqrt(1.0 / 3.0)).epsilon(1e-14));
}

TEST_CASE("wl_distance") {
  const Grid g{TorusGrid(8), ThetaGrid(-6.0, 6.0, 240)};
  const auto mu = normal_fibers(g, [](double x) { return std::sin(6.28 * x); }, 0.4);
  CHECK(wl_distance(mu, mu) == 0.0);
  SUBCASE("translation by c") {
    // Shift by 10 cells: exact on the grid away from the boundary.
    const double c = 10 * g.theta.dtheta();
    const auto nu = normal_fibers(g, [c](double x) { return std::sin(6.28 * x) + c; }, 0.4);
    CHECK(wl_distance(mu, nu) == doctest::Approx(c).epsilon(1e-6));
  }
  SUBCASE("counterexample") {
    const auto [a, b] = counterexample_pair(40);
    CHECK(wl_distance(a, b) == 1.0);
    CHECK(w2_flattened(a, b) <= 0.25 + 1e-9);
    CHECK(w2_flattened(a, b) <= wl_distance(a, b));
  }
  SUBCASE("grid vs discrete overload agrees with to_discrete") {
    const auto d = to_discrete(mu);
    CHECK(wl_distance(mu, d) >= 0.0);
    CHECK(wl_distance(d, d) == 0.0);
  }
}

TEST_CASE("optimal maps") {
  const Grid g{TorusGrid(2), ThetaGrid(-6.0, 6.0, 480)};
  SUBCASE("identity") {
    const auto mu = normal_fibers(g, 0.3, 0.5);
    const auto map = l_optimal_map(mu, mu);
    CHECK(map.displacement_norm() == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& f : map.fibers) CHECK(f.is_monotone());
  }
  SUBCASE("translation") {
    const double c = 20 * g.theta.dtheta();
    const auto map = l_optimal_map(normal_fibers(g, 0.0, 0.5), normal_fibers(g, c, 0.5));
    const auto v = map.fibers[0].values_at_centers();
    for (int j = 180; j < 300; ++j) CHECK(v[static_cast<std::size_t>(j)] - g.theta.center(j) == doctest::Approx(c).epsilon(1e-6));
    CHECK(map.displacement_norm() == doctest::Approx(c).epsilon(1e-6));
  }
  SUBCASE("Gaussian to half-width Gaussian is affine") {
    const double m = 0.5;
    const auto map = l_optimal_map(normal_fibers(g, m, 1.0), normal_fibers(g, m, 0.25));
    const auto v = map.fibers[1].values_at_centers();
    for (int j = 160; j < 320; ++j) {
      const double t = g.theta.center(j);
      CHECK(std::abs(v[static_cast<std::size_t>(j)] - (m + (t - m) / 2)) <= 1e-3);
    }
  }
}

TEST_CASE("geodesic") {
  const Grid g{TorusGrid(4), ThetaGrid(-6.0, 6.0, 256)};
  std::mt19937_64 rng(3);
  const auto a = random_measure(g, rng), b = random_measure(g, rng);
  SUBCASE("endpoints") {
    const auto g0 = geodesic(a, b, 0.0);
    double tv = 0.0;
    for (std::size_t k = 0; k < a.data().size(); ++k) tv += std::abs(g0.data()[k] - a.data()[k]);
    CHECK(tv * g.cell_area() <= 1e-8);
    CHECK(wl_distance(geodesic(a, b, 1.0), b) <= 2.0 * g.theta.dtheta());
  }
  SUBCASE("constant speed between sample times") {
    const double d = wl_distance(a, b);
    const double ts[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    std::vector<GridMeasure> pts;
    for (double t : ts) pts.push_back(geodesic(a, b, t));
    for (int s = 0; s < 5; ++s) {
      for (int t = s + 1; t < 5; ++t) {
        const double want = (ts[t] - ts[s]) * d;
        CHECK(std::abs(wl_distance(pts[s], pts[t]) - want) <= 0.02 * want);
      }
    }
  }
}

TEST_CASE("metric derivative") {
  const Grid g{TorusGrid(2), ThetaGrid(-6.0, 6.0, 480)};
  MeasureCurve still, moving;
  const double c = 0.5, dt = 0.1;
  for (int k = 0; k <= 4; ++k) {
    still.push_back(k * dt, normal_fibers(g, 0.0, 0.4));
    moving.push_back(k * dt, normal_fibers(g, c * k * dt, 0.4));
  }
  CHECK(metric_derivative(still, 2).value == 0.0);
  const auto mid = metric_derivative(moving, 2);
  CHECK_FALSE(mid.one_sided);
  CHECK(mid.value == doctest::Approx(c).epsilon(0.05));
  const auto end = metric_derivative(moving, 4);
  CHECK(end.one_sided);
  CHECK(end.value == doctest::Approx(c).epsilon(0.05));
}
