#include <doctest.h>

#include <filesystem>
#include <stdexcept>

#include "fibered/curve.hpp"
#include "fibered/io.hpp"
#include "helpers.hpp"

using namespace fibered;
using namespace testing;

TEST_CASE("grid basics") {
  TorusGrid t(8);
  CHECK(t.wrap(-1) == 7);
  CHECK(t.wrap(8) == 0);
  CHECK(t.dx() == doctest::Approx(0.125));
  ThetaGrid g(-1.0, 1.0, 4);
  CHECK(g.center(0) == doctest::Approx(-0.75));
  CHECK(g.cell_of(0.1) == 2);
  CHECK(g.cell_of(5.0) == 3);
  CHECK_THROWS_AS(ThetaGrid(1.0, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(ThetaGrid(0.0, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(TorusGrid(0), std::invalid_argument);
}

TEST_CASE("grid measure invariants") {
  const Grid g{TorusGrid(3), ThetaGrid(0.0, 1.0, 2)};
  CHECK_NOTHROW(GridMeasure(g, std::vector<double>(6, 1.0)));
  CHECK_THROWS_AS(GridMeasure(g, {1, 1, 1, 1, 2, 1}), std::invalid_argument);
  CHECK_THROWS_AS(GridMeasure(g, {2, 0, 1, 1, -1, 3}), std::invalid_argument);
  CHECK_THROWS_AS(GridMeasure(g, std::vector<double>(5, 1.0)), std::invalid_argument);
}

TEST_CASE("fiber extraction") {
  const Grid g{TorusGrid(4), ThetaGrid(-2.0, 2.0, 40)};
  SUBCASE("uniform measure gives the uniform fiber") {
    const auto mu = normalize_fibers(g, std::vector<double>(g.size(), 1.0));
    for (int i = 0; i < 4; ++i) {
      const auto f = mu.fiber(i);
      for (double w : f.weights()) CHECK(w == doctest::Approx(0.25));
    }
  }
  SUBCASE("fibers concentrated at different heights") {
    const auto mu = normal_fibers(g, [](double x) { return x < 0.5 ? 1.0 : -1.0; }, 0.01);
    CHECK(mu.fiber(0).mean() == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(mu.fiber(3).mean() == doctest::Approx(-1.0).epsilon(1e-6));
  }
  SUBCASE("with_fiber round trip is bit-exact") {
    const auto mu = normal_fibers(g, 0.0, 1.0);
    const auto f = normal_fibers(g, 0.7, 0.2).fiber(0);
    CHECK(mu.with_fiber(2, f).fiber(2) == f);
    CHECK(mu.with_fiber(2, f).fiber(1) == mu.fiber(1));
  }
}

TEST_CASE("second moment") {
  SUBCASE("all mass in the cell centred at 2.05") {
    // Midpoint quadrature sees the cell centre only.
    const Grid g{TorusGrid(2), ThetaGrid(-4.0, 4.0, 80)};
    CHECK(second_moment(point_fibers(g, 2.05)) == doctest::Approx(2.05 * 2.05).epsilon(1e-12));
  }
  SUBCASE("standard normal") {
    const Grid g{TorusGrid(2), ThetaGrid(-8.0, 8.0, 800)};
    // Midpoint error dtheta^2 / 12 * int f'' theta^2 ~ 1e-5; truncation ~ 1e-13.
    CHECK(second_moment(normal_fibers(g, 0.0, 1.0)) == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("symmetric mixture at +-1") {
    const Grid g{TorusGrid(1), ThetaGrid(-3.0, 3.0, 600)};
    std::vector<double> raw;
    for (int j = 0; j < 600; ++j) {
      const double t = g.theta.center(j);
      raw.push_back(std::exp(-0.5 * (t - 1) * (t - 1) / 0.01) + std::exp(-0.5 * (t + 1) * (t + 1) / 0.01));
    }
    // Each bump contributes 1 + var.
    CHECK(second_moment(normalize_fibers(g, raw)) == doctest::Approx(1.01).epsilon(1e-4));
  }
}

TEST_CASE("normalize_fibers") {
  const Grid g{TorusGrid(2), ThetaGrid(0.0, 2.0, 4)};
  const auto ones = normalize_fibers(g, std::vector<double>(8, 1.0));
  for (double v : ones.data()) CHECK(v == doctest::Approx(0.5));
  const auto scaled = normalize_fibers(g, {7, 14, 21, 28, 1, 2, 3, 4});
  CHECK(scaled.fiber(0) == scaled.fiber(1));
  try {
    normalize_fibers(g, {1, 1, 1, 1, 0, 0, 0, 0});
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("1") != std::string::npos);
  }
}

TEST_CASE("discrete fibers merge duplicate atoms") {
  DiscreteFiber f({{1.0, 0.25}, {0.0, 0.5}, {1.0, 0.25}});
  REQUIRE(f.size() == 2);
  CHECK(f.atoms()[0].location == 0.0);
  CHECK(f.atoms()[1].mass == doctest::Approx(0.5));
  CHECK(f.mean() == doctest::Approx(0.5));
  CHECK_THROWS(DiscreteFiber({{0.0, 0.5}}));
}

TEST_CASE("grid measure csv round trip") {
  const Grid g{TorusGrid(3), ThetaGrid(-2.0, 2.0, 16)};
  const auto mu = normal_fibers(g, [](double x) { return x; }, 0.3);
  const auto dir = std::filesystem::temp_directory_path() / "fibered_io_test";
  std::filesystem::create_directories(dir);
  write_grid_measure(dir / "mu.csv", mu);
  CHECK(std::filesystem::exists(dir / "mu.json"));
  CHECK(read_grid_measure(dir / "mu.csv") == mu);
  std::filesystem::remove_all(dir);
}

TEST_CASE("measure curve") {
  const Grid g{TorusGrid(2), ThetaGrid(-2.0, 2.0, 8)};
  const auto a = normal_fibers(g, 0.0, 0.5), b = normal_fibers(g, 0.5, 0.5);
  MeasureCurve c;
  c.push_back(0.0, a);
  c.push_back(0.5, b);
  CHECK_THROWS(c.push_back(0.5, a));
  CHECK(c.step() == doctest::Approx(0.5));
  const auto r = c.reversed();
  CHECK(r.time(1) == 0.5);
  CHECK(r.state(0) == b);
}
