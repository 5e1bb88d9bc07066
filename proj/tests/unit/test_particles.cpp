#include <doctest.h>

#include <algorithm>
#include <random>

#include "fibered/checks.hpp"
#include "fibered/functionals.hpp"
#include "fibered/micro.hpp"
#include "fibered/particles.hpp"
#include "fibered/rng.hpp"
#include "fibered/transport.hpp"
#include "helpers.hpp"

using namespace fibered;
using namespace testing;

TEST_CASE("philox known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(philox4x32(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("normal draws") {
  double s1 = 0.0, s2 = 0.0;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const auto d = draw(42, static_cast<std::uint64_t>(k), 3);
    CHECK(d.uniform[0] > 0.0);
    CHECK(d.uniform[0] < 1.0);
    s1 += d.normal[0] + d.normal[1];
    s2 += d.normal[0] * d.normal[0] + d.normal[1] * d.normal[1];
  }
  CHECK(std::abs(s1 / (2 * n)) < 4.0 / std::sqrt(2.0 * n));
  CHECK(s2 / (2 * n) == doctest::Approx(1.0).epsilon(0.03));
  CHECK(standard_normal(1, 2, 3) == draw(1, 2, 3).normal[0]);
  CHECK(standard_normal(1, 2, 3) != standard_normal(2, 2, 3));
}

TEST_CASE("hamiltonian") {
  ParticleState one{{2.0}};
  CHECK(hamiltonian(one, quadratic_model()) == doctest::Approx(2.0));
  ParticleState two{{1.0, 1.0}};
  CHECK(hamiltonian(two, double_well(Kernel::constant(1.0))) == doctest::Approx(0.5));
  SUBCASE("gradient against central differences") {
    const auto p = ModelParams::default_model();
    std::mt19937_64 rng(4);
    std::normal_distribution<double> nd(0.0, 1.0);
    ParticleState s;
    for (int k = 0; k < 12; ++k) s.thetas.push_back(nd(rng));
    const auto grad = hamiltonian_gradient(s, p);
    for (int k = 0; k < 12; ++k) {
      const double h = 1e-5;
      auto up = s, dn = s;
      up.thetas[static_cast<std::size_t>(k)] += h;
      dn.thetas[static_cast<std::size_t>(k)] -= h;
      const double fd = (hamiltonian(up, p) - hamiltonian(dn, p)) / (2 * h);
      CHECK(std::abs(fd - grad[static_cast<std::size_t>(k)]) <= 1e-6 * std::max(1.0, std::abs(fd)));
    }
  }
}

TEST_CASE("micro free energy and slope") {
  const Grid g{TorusGrid(1), ThetaGrid(-6.0, 6.0, 600)};
  const auto free = double_well();
  SUBCASE("Gibbs sites give -log Z") {
    const auto gibbs = gibbs_measure(g, free);
    double z = 0.0;
    for (int j = 0; j < g.n_theta(); ++j) z += std::exp(-free.psi()(g.theta.center(j))) * g.theta.dtheta();
    ProductMeasure nu{{gibbs.fiber(0), gibbs.fiber(0), gibbs.fiber(0)}};
    CHECK(micro_free_energy(nu, free) == doctest::Approx(-std::log(z)).epsilon(1e-10));
    CHECK(micro_slope(nu, free) <= 1e-3);
  }
  SUBCASE("one site is a relative entropy") {
    const auto mu = normal_fibers(g, 0.4, 0.6);
    std::vector<double> ref;
    for (int j = 0; j < g.n_theta(); ++j) ref.push_back(std::exp(-free.psi()(g.theta.center(j))));
    CHECK(micro_free_energy(ProductMeasure{{mu.fiber(0)}}, free) ==
          doctest::Approx(relative_entropy(mu, ref)).epsilon(1e-10));
  }
  SUBCASE("Gaussian site under the quadratic model") {
    const Grid w{TorusGrid(1), ThetaGrid(-8.0, 8.0, 800)};
    const double a = 0.5;
    const auto mu = normal_fibers(w, a, 1.0);
    CHECK(micro_slope(ProductMeasure{{mu.fiber(0)}}, quadratic_model(-8, 8)) == doctest::Approx(a * a).epsilon(0.02));
  }
  SUBCASE("recovery sequences approach the macroscopic energy") {
    const auto p = ModelParams::default_model();
    // The slope gap is O(1/N) only past N ~ 32; smaller N cross the limit.
    const Grid big{TorusGrid(256), ThetaGrid(-6.0, 6.0, 128)};
    const auto mu = gaussian_measure(big, 0.3, 0.8, 0.3);
    const double f = free_energy(mu, p);
    double prev = 1e300;
    for (int n : {32, 64, 128, 256}) {
      const double gap = std::abs(micro_free_energy(recovery_sequence(mu, n), p) - f);
      CHECK(gap < prev);
      prev = gap;
    }
    const double slope2 = metric_slope(mu, p) * metric_slope(mu, p);
    double prev_s = 1e300;
    for (int n : {32, 64, 128, 256}) {
      const double gap = std::abs(micro_slope(recovery_sequence(mu, n), p) - slope2);
      CHECK(gap < prev_s);
      prev_s = gap;
    }
  }
}

TEST_CASE("simulate") {
  SUBCASE("noise-free Ornstein-Uhlenbeck decays like exp(-t)") {
    SimulateOptions opts;
    opts.noise_scale = 0.0;
    const double dt = 1e-3;
    const auto traj = simulate(ParticleState{{1.0}}, quadratic_model(), dt, 1.0, 1, opts);
    CHECK(traj.states.back().thetas[0] == doctest::Approx(std::pow(1.0 - dt, 1000)).epsilon(1e-12));
    CHECK(std::abs(traj.states.back().thetas[0] - std::exp(-1.0)) <= dt);
  }
  SUBCASE("identical seeds give identical trajectories") {
    const auto p = ModelParams::default_model();
    ParticleState s{std::vector<double>(32, 0.1)};
    const auto a = simulate(s, p, 1e-3, 0.05, 9), b = simulate(s, p, 1e-3, 0.05, 9), c = simulate(s, p, 1e-3, 0.05, 10);
    CHECK(a.states.back().thetas == b.states.back().thetas);
    CHECK(a.states.back().thetas != c.states.back().thetas);
    CHECK(a.times.size() == 51);
  }
  SUBCASE("stationary variance of the Ornstein-Uhlenbeck system") {
    const int n = 400;
    const auto traj = simulate(ParticleState{std::vector<double>(n, 0.0)}, quadratic_model(), 1e-2, 10.0, 5);
    double s2 = 0.0;
    for (double v : traj.states.back().thetas) s2 += v * v;
    // Euler-Maruyama stationary variance is 1 / (1 - dt / 2).
    CHECK(std::abs(s2 / n - 1.0) <= 3.0 / std::sqrt(static_cast<double>(n)));
  }
  SUBCASE("detailed balance: decoupled spins sample exp(-Psi)") {
    const auto free = double_well();
    const int n = 2000;
    const auto traj = simulate(ParticleState{std::vector<double>(n, 0.0)}, free, 1e-3, 5.0, 17, {1.0, 50});
    // 51 recorded states from the second half: about 10^5 spin samples.
    std::vector<Atom> atoms;
    for (std::size_t m = traj.states.size() / 2; m < traj.states.size(); ++m) {
      for (double v : traj.states[m].thetas) atoms.push_back({v, 1.0});
    }
    for (auto& a : atoms) a.mass = 1.0 / static_cast<double>(atoms.size());
    const Grid g{TorusGrid(1), ThetaGrid(-6.0, 6.0, 1200)};
    CHECK(static_cast<double>(atoms.size()) >= 1e5);
    CHECK(w2_fiber(DiscreteFiber(atoms), gibbs_measure(g, free).fiber(0)) <= 0.05);
  }
  CHECK_THROWS_AS(simulate(ParticleState{{0.0}}, quadratic_model(), 0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("sample_initial") {
  const auto free = double_well();
  const ThetaGrid tg(-6.0, 6.0, 600);
  double z = 0.0;
  for (int j = 0; j < tg.n_theta; ++j) z += std::exp(-free.psi()(tg.center(j))) * tg.dtheta();
  SUBCASE("i.i.d. Gibbs samples") {
    auto kappa = [z](double, double) { return 1.0 / z; };
    const auto s = sample_initial(free, kappa, tg, 20000, 3);
    double acc = 0.0;
    for (double v : s.thetas) acc += free.psi().derivative(v);
    // Var(Psi') under exp(-Psi) is about 1.
    CHECK(std::abs(acc / 20000) <= 4.0 / std::sqrt(20000.0));
    CHECK(s.thetas == sample_initial(free, kappa, tg, 20000, 3).thetas);
    CHECK_THROWS_AS(sample_initial(free, [](double, double) { return 1.0; }, tg, 10, 3), std::invalid_argument);
  }
  SUBCASE("narrow bump") {
    double mass = 0.0;
    for (int j = 0; j < tg.n_theta; ++j) mass += std::exp(-0.5 * std::pow(tg.center(j) - 1.5, 2) / 1e-4) * tg.dtheta();
    auto bump = [&](double, double t) { return std::exp(-0.5 * (t - 1.5) * (t - 1.5) / 1e-4 + free.psi()(t)) / mass; };
    const auto s = sample_initial(free, bump, tg, 200, 4);
    for (double v : s.thetas) CHECK(std::abs(v - 1.5) <= 0.1);
  }
}

TEST_CASE("K^N and L^N") {
  ParticleState s{{0.5, -1.0, 2.0, 0.0}};
  const auto k = kmap(s);
  REQUIRE(k.x.size() == 4);
  CHECK(k.x[2] == doctest::Approx(0.5));
  CHECK(k.mass == doctest::Approx(0.25));
  const auto l = lmap(s);
  CHECK(l.torus.n_x == 4);
  CHECK(l.fibers[1].atoms()[0].location == -1.0);
  CHECK(k_vs_l_distance(s) <= 0.25);
  CHECK(k_vs_l_distance(ParticleState{{3.0}}) <= 1.0);
  std::mt19937_64 rng(2);
  std::normal_distribution<double> nd(0.0, 1.0);
  ParticleState big;
  for (int i = 0; i < 1000; ++i) big.thetas.push_back(nd(rng));
  CHECK(k_vs_l_distance(big) <= 1e-3);
}

TEST_CASE("recovery sequence and coarsening") {
  const Grid g{TorusGrid(32), ThetaGrid(-6.0, 6.0, 128)};
  const auto mu = gaussian_measure(g, 0.3, 0.8, 0.3);
  const auto full = recovery_sequence(mu, 32);
  for (int i = 0; i < 32; ++i) CHECK(full.sites[static_cast<std::size_t>(i)] == mu.fiber(i));
  const auto flat = normal_fibers(g, 0.2, 0.5);
  const auto f0 = flat.fiber(0);
  for (const auto& site : recovery_sequence(flat, 4).sites) {
    for (int j = 0; j < g.n_theta(); ++j) CHECK(site.weight(j) == doctest::Approx(f0.weight(j)).epsilon(1e-14));
  }
  CHECK_THROWS_AS(recovery_sequence(mu, 5), std::invalid_argument);
  double prev = 1e300;
  for (int n : {4, 8, 16, 32}) {
    const double d = wl_distance(mu, coarsen(mu, n));
    CHECK(d < prev);
    prev = d;
  }
  CHECK(prev <= 1e-12);
}

TEST_CASE("empirical_to_grid") {
  const Grid g{TorusGrid(2), ThetaGrid(-5.0, 5.0, 20)};
  std::vector<ParticleState> samples;
  std::mt19937_64 rng(8);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (int m = 0; m < 500; ++m) {
    ParticleState s;
    for (int k = 0; k < 40; ++k) s.thetas.push_back(nd(rng));
    samples.push_back(s);
  }
  const auto est = empirical_to_grid(samples, g);
  CHECK(est.fiber_mass_error() <= 1e-12);
  CHECK(est.total_mass() == doctest::Approx(1.0));
  // 10^4 samples per site: cell probabilities within 4 binomial standard errors.
  for (int j = 0; j < g.n_theta(); ++j) {
    const double a = g.theta.edge(j), b = g.theta.edge(j + 1);
    const double pr = 0.5 * (std::erf(b / std::sqrt(2.0)) - std::erf(a / std::sqrt(2.0)));
    const double se = std::sqrt(pr * (1 - pr) / 10000.0);
    CHECK(std::abs(est.fiber(0).cell_mass(j) - pr) <= 4 * se + 1e-12);
  }
  CHECK_THROWS(empirical_to_grid({ParticleState{{0.0}}}, g));
}
