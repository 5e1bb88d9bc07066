#include <doctest.h>

#include <random>

#include "fibered/checks.hpp"
#include "fibered/functionals.hpp"
#include "fibered/jko.hpp"
#include "fibered/pde.hpp"
#include "fibered/transport.hpp"
#include "helpers.hpp"

using namespace fibered;
using namespace testing;

namespace {

double fiber_variance(const GridMeasure& mu, int i) {
  const auto f = mu.fiber(i);
  return f.second_moment() - f.mean() * f.mean();
}

}  // namespace

TEST_CASE("Bernoulli function") {
  CHECK(bernoulli(0.0) == 1.0);
  for (double z : {-30.0, -1.0, -1e-9, 1e-9, 0.3, 12.0}) {
    CHECK(bernoulli(-z) == doctest::Approx(bernoulli(z) + z).epsilon(1e-12));
  }
  CHECK(bernoulli(1e-300) == doctest::Approx(1.0));
}

TEST_CASE("pde_step") {
  SUBCASE("Gibbs measure is stationary") {
    const auto p = double_well();
    const Grid g{TorusGrid(8), ThetaGrid(-6.0, 6.0, 256)};
    const auto gibbs = gibbs_measure(g, p);
    const auto next = pde_step(gibbs, p, 0.5 * stability_bound(g, p, FluxScheme::exponential_fitting));
    for (std::size_t k = 0; k < gibbs.data().size(); ++k) CHECK(std::abs(next.data()[k] - gibbs.data()[k]) <= 1e-8);
  }
  SUBCASE("pure diffusion grows the variance by 2 dt") {
    const auto p = ModelParams(Polynomial({0.0}), Kernel::constant(0.0), GrowthConstants{}, -6.0, 6.0);
    const Grid g{TorusGrid(2), ThetaGrid(-6.0, 6.0, 600)};
    auto mu = normal_fibers(g, 0.0, 0.5);
    const double dt = 0.25 * g.theta.dtheta() * g.theta.dtheta();
    const double v0 = fiber_variance(mu, 0);
    const int steps = 200;
    for (int k = 0; k < steps; ++k) mu = pde_step(mu, p, dt);
    CHECK(fiber_variance(mu, 0) - v0 == doctest::Approx(2.0 * dt * steps).epsilon(0.01));
  }
  SUBCASE("mass conservation and positivity") {
    const auto p = ModelParams::default_model();
    const Grid g{TorusGrid(8), ThetaGrid(-6.0, 6.0, 128)};
    std::mt19937_64 rng(1);
    auto mu = random_measure(g, rng);
    const double dt = 0.5 * stability_bound(g, p, FluxScheme::exponential_fitting);
    for (int k = 0; k < 50; ++k) mu = pde_step(mu, p, dt);
    for (int i = 0; i < g.n_x(); ++i) CHECK(std::abs(mu.fiber_mass(i) - 1.0) <= 1e-12);
    CHECK(mu.min_density() >= 0.0);
    // Central fluxes keep positivity only on smooth data.
    const auto smooth = gaussian_measure(g, 0.3, 0.8, 0.3);
    CHECK(pde_step(smooth, p, dt, FluxScheme::central).fiber_mass_error() <= 1e-12);
  }
  SUBCASE("bad step") {
    const auto p = ModelParams::default_model();
    const Grid g{TorusGrid(2), ThetaGrid(-6.0, 6.0, 64)};
    CHECK_THROWS(pde_step(gibbs_measure(g, p), p, -1.0));
  }
}

TEST_CASE("solve_pde") {
  const auto p = ModelParams::default_model();
  const Grid g{TorusGrid(16), ThetaGrid(-6.0, 6.0, 128)};
  PdeConfig cfg;
  cfg.horizon = 0.2;
  cfg.output_interval = 0.02;
  SUBCASE("energy decreases and mass is kept") {
    const auto run = solve_pde(gaussian_measure(g, 0.3, 0.8, 0.3), p, cfg);
    REQUIRE(run.curve.size() == 11);
    CHECK(run.curve.time(10) == doctest::Approx(0.2));
    CHECK(run.dt <= run.stability_bound);
    for (std::size_t k = 1; k < run.observables.size(); ++k) {
      CHECK(run.observables[k].free_energy <= run.observables[k - 1].free_energy + 1e-9);
    }
    for (const auto& o : run.observables) {
      CHECK(o.fiber_mass_error <= 1e-10);
      CHECK(o.boundary_mass < 1e-8);
    }
  }
  SUBCASE("decoupled fibers follow the one-dimensional equation") {
    const auto free = double_well();
    const auto mu0 = gaussian_measure(g, 0.3, 0.8, 0.3);
    const auto run = solve_pde(mu0, free, cfg);
    for (int i : {0, 5}) {
      const Grid one{TorusGrid(1), g.theta};
      const auto single = solve_pde(GridMeasure(one, std::vector<double>(mu0.row(i).begin(), mu0.row(i).end())), free, cfg);
      const auto a = run.curve.back().row(i), b = single.curve.back().row(0);
      for (std::size_t j = 0; j < a.size(); ++j) CHECK(std::abs(a[j] - b[j]) <= 1e-8);
    }
  }
  SUBCASE("contraction bound") {
    const auto a = solve_pde(gaussian_measure(g, 0.3, 0.8, 0.3), p, cfg);
    const auto b = solve_pde(gaussian_measure(g, -0.5, 0.2, 0.5), p, cfg);
    const double d0 = wl_distance(a.curve.front(), b.curve.front());
    for (std::size_t k = 0; k < a.curve.size(); ++k) {
      CHECK(wl_distance(a.curve.state(k), b.curve.state(k)) <= std::exp(-p.lambda() * a.curve.time(k)) * d0 * 1.05);
    }
  }
  SUBCASE("regularization estimate") {
    // phi(mu_t) <= phi(nu) + lambda / (2 (e^{lambda t} - 1)) W^L(mu_0, nu)^2
    PdeConfig longer = cfg;
    longer.horizon = 1.0;
    longer.output_interval = 0.1;
    const auto run = solve_pde(gaussian_measure(g, 0.3, 0.8, 0.3), p, longer);
    std::mt19937_64 rng(21);
    const double lam = p.lambda();
    for (int k = 0; k < 10; ++k) {
      const auto nu = random_measure(g, rng);
      const double d = wl_distance(run.curve.front(), nu);
      for (double t : {0.1, 0.5, 1.0}) {
        const auto idx = static_cast<std::size_t>(std::llround(t / 0.1));
        const double rhs = free_energy(nu, p) + lam / (2.0 * std::expm1(lam * t)) * d * d;
        CHECK(free_energy(run.curve.state(idx), p) <= rhs + 0.05 * std::abs(rhs));
      }
    }
  }
  SUBCASE("horizon must be a multiple of the output interval") {
    PdeConfig bad = cfg;
    bad.output_interval = 0.03;
    CHECK_THROWS_AS(solve_pde(gaussian_measure(g, 0.3, 0.8, 0.3), p, bad), std::invalid_argument);
  }
}

TEST_CASE("isotonic projection") {
  const std::vector<double> v{1.0, 3.0, 2.0, 4.0}, w{1.0, 1.0, 1.0, 1.0};
  const auto r = isotonic_projection(v, w);
  CHECK(r == std::vector<double>{1.0, 2.5, 2.5, 4.0});
  const std::vector<double> v2{3.0, 1.0}, w2{1.0, 3.0};
  const auto r2 = isotonic_projection(v2, w2);
  CHECK(r2[0] == doctest::Approx(1.5));
  CHECK(r2[1] == doctest::Approx(1.5));
  const std::vector<double> sorted{-1.0, 0.0, 2.0};
  CHECK(isotonic_projection(sorted, std::vector<double>(3, 0.5)) == sorted);
}

TEST_CASE("jko configuration") {
  const auto p = ModelParams::default_model();
  JkoConfig cfg;
  cfg.tau = 0.7;
  try {
    validate(cfg, p);
    FAIL("expected an error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("tau < 1/lambda^-") != std::string::npos);
  }
  cfg.tau = 0.5;
  CHECK_NOTHROW(validate(cfg, p));
}

TEST_CASE("jko_step") {
  SUBCASE("Gibbs measure is a fixed point") {
    const auto free = double_well();
    const Grid g{TorusGrid(4), ThetaGrid(-6.0, 6.0, 256)};
    const auto gibbs = gibbs_measure(g, free);
    const auto step = jko_step(gibbs, free, JkoConfig{});
    CHECK(wl_distance(step.state, gibbs) <= 1e-6);
    CHECK(std::abs(step.report.decrease) <= 1e-10);
  }
  SUBCASE("Ornstein-Uhlenbeck mean recursion") {
    const auto p = quadratic_model(-8, 8);
    const Grid g{TorusGrid(2), ThetaGrid(-8.0, 8.0, 400)};
    JkoConfig cfg;
    cfg.tau = 0.1;
    const double a = 1.0;
    const auto step = jko_step(normal_fibers(g, a, 1.0), p, cfg);
    CHECK(step.state.fiber_mean(0) == doctest::Approx(a / (1.0 + cfg.tau)).epsilon(0.03));
    CHECK(step.report.decrease >= 0.0);
    CHECK(step.report.objective <= step.report.objective_start);
  }
}

TEST_CASE("solve_jko") {
  const auto p = ModelParams::default_model();
  const Grid g{TorusGrid(8), ThetaGrid(-6.0, 6.0, 128)};
  const auto mu0 = gaussian_measure(g, 0.3, 0.8, 0.3);
  JkoConfig cfg;
  cfg.tau = 0.05;
  const auto run = solve_jko(mu0, p, cfg, 0.2);
  REQUIRE(run.curve.size() == 5);
  for (const auto& d : run.diagnostics) CHECK(d.decrease >= 0.0);
  for (std::size_t k = 1; k < run.observables.size(); ++k) {
    CHECK(run.observables[k].free_energy <= run.observables[k - 1].free_energy + 1e-12);
  }
  SUBCASE("two steps vs one double step") {
    JkoConfig half = cfg, full = cfg;
    half.tau = 0.025;
    full.tau = 0.05;
    const auto two = jko_step(jko_step(mu0, p, half).state, p, half).state;
    const auto one = jko_step(mu0, p, full).state;
    JkoConfig quarter = cfg, halfd = cfg;
    quarter.tau = 0.0125;
    halfd.tau = 0.025;
    const auto two_b = jko_step(jko_step(mu0, p, quarter).state, p, quarter).state;
    const auto one_b = jko_step(mu0, p, halfd).state;
    // O(tau) local discrepancy: halving tau should cut it.
    CHECK(wl_distance(two_b, one_b) < wl_distance(two, one));
  }
}
