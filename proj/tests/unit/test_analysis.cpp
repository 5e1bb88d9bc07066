#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "fibered/analysis.hpp"
#include "fibered/checks.hpp"
#include "fibered/functionals.hpp"
#include "fibered/micro.hpp"
#include "fibered/particles.hpp"
#include "helpers.hpp"

using namespace fibered;
using namespace testing;

namespace {

MeasureCurve constant_curve(const GridMeasure& mu, int samples, double dt) {
  MeasureCurve c;
  for (int k = 0; k < samples; ++k) c.push_back(k * dt, mu);
  return c;
}

}  // namespace

TEST_CASE("dissipation") {
  const auto p = ModelParams::default_model();
  const Grid g{TorusGrid(16), ThetaGrid(-6.0, 6.0, 128)};
  SUBCASE("constant equilibrium curve") {
    const auto free = double_well();
    const auto r = dissipation(constant_curve(gibbs_measure(g, free), 5, 0.1), free);
    CHECK(r.energy_end - r.energy_start == 0.0);
    CHECK(r.speed_integral == 0.0);
    CHECK(r.slope_integral < 1e-3);
    CHECK(std::abs(r.residual) < 1e-3);
  }
  SUBCASE("gradient flow and its reversal") {
    PdeConfig cfg;
    cfg.horizon = 0.2;
    cfg.output_interval = 0.01;
    const auto run = solve_pde(gaussian_measure(g, 0.3, 0.8, 0.3), p, cfg);
    const auto fwd = dissipation(run.curve, p);
    const auto bwd = dissipation(run.curve.reversed(), p);
    CHECK(fwd.slope_integral >= 0.0);
    CHECK(fwd.speed_integral >= 0.0);
    CHECK(std::abs(fwd.residual) < 0.02 * fwd.slope_integral);
    const double swap = 2.0 * (fwd.energy_start - fwd.energy_end);
    CHECK(swap > 0.0);
    CHECK(std::abs(bwd.residual - swap) <= 2.0 * std::abs(fwd.residual) + 1e-12);
    REQUIRE(fwd.rows.size() == run.curve.size());
    CHECK(fwd.rows.front().one_sided);
    CHECK_FALSE(fwd.rows[3].one_sided);

    const auto dir = std::filesystem::temp_directory_path() / "fibered_report_test";
    std::filesystem::create_directories(dir);
    write_report_json(dir / "r.json", fwd);
    const auto j = nlohmann::json::parse(std::ifstream(dir / "r.json"));
    CHECK(j["residual"].get<double>() == fwd.residual);
    CHECK(j["rows"].size() == fwd.rows.size());
    write_report_table(dir / "r.txt", fwd);
    CHECK(std::filesystem::file_size(dir / "r.txt") > 0);
    std::filesystem::remove_all(dir);
  }
}

TEST_CASE("micro dissipation") {
  const auto free = double_well();
  SUBCASE("constant product equilibrium") {
    const Grid g{TorusGrid(1), ThetaGrid(-6.0, 6.0, 256)};
    const auto f = gibbs_measure(g, free).fiber(0);
    ProductCurve c{{0.0, 0.1, 0.2}, {ProductMeasure{{f, f}}, ProductMeasure{{f, f}}, ProductMeasure{{f, f}}}};
    const auto r = micro_dissipation(c, free);
    CHECK(std::abs(r.residual) < 1e-3);
    CHECK(r.speed_integral == 0.0);
  }
  SUBCASE("one site matches the x-constant macroscopic curve") {
    const Grid g{TorusGrid(1), ThetaGrid(-6.0, 6.0, 128)};
    PdeConfig cfg;
    cfg.horizon = 0.1;
    cfg.output_interval = 0.01;
    const auto run = solve_pde(normal_fibers(g, 0.8, 0.2), free, cfg);
    ProductCurve pc;
    for (std::size_t k = 0; k < run.curve.size(); ++k) {
      pc.times.push_back(run.curve.time(k));
      pc.states.push_back(product_of_fibers(run.curve.state(k)));
    }
    const auto micro = micro_dissipation(pc, free);
    const auto macro = dissipation(run.curve, free);
    CHECK(micro.residual == doctest::Approx(macro.residual).epsilon(1e-8));
    CHECK(micro.slope_integral == doctest::Approx(macro.slope_integral).epsilon(1e-8));
  }
  SUBCASE("recovery sequences of a gradient flow") {
    const auto p = ModelParams::default_model();
    const Grid g{TorusGrid(32), ThetaGrid(-6.0, 6.0, 128)};
    PdeConfig cfg;
    cfg.horizon = 0.1;
    cfg.output_interval = 0.01;
    const auto run = solve_pde(gaussian_measure(g, 0.3, 0.8, 0.3), p, cfg);
    const double macro = dissipation(run.curve, p).residual;
    double prev = 1e300;
    for (int n : {4, 8, 16, 32}) {
      ProductCurve pc;
      for (std::size_t k = 0; k < run.curve.size(); ++k) {
        pc.times.push_back(run.curve.time(k));
        pc.states.push_back(recovery_sequence(run.curve.state(k), n));
      }
      const double gap = std::abs(micro_dissipation(pc, p).residual - macro);
      CHECK(gap < prev);
      prev = gap;
    }
  }
}

TEST_CASE("rate function") {
  const auto p = ModelParams::default_model();
  const Grid g{TorusGrid(16), ThetaGrid(-6.0, 6.0, 128)};
  PdeConfig cfg;
  cfg.horizon = 0.2;
  cfg.output_interval = 0.01;
  const auto mu0 = gaussian_measure(g, 0.3, 0.8, 0.3);
  const auto run = solve_pde(mu0, p, cfg);
  const double eps = std::abs(dissipation(run.curve, p).residual);
  SUBCASE("zero on the gradient flow from the reference") {
    const auto r = ldp_rate(run.curve, mu0, p);
    CHECK(r.initial_entropy == doctest::Approx(0.0).epsilon(1e-14));
    CHECK(std::abs(r.rate) <= eps);
  }
  SUBCASE("entropy term when started elsewhere") {
    const auto other = gaussian_measure(g, 0.0, 0.5, 0.4);
    const auto r = ldp_rate(solve_pde(other, p, cfg).curve, mu0, p);
    CHECK(r.rate == doctest::Approx(relative_entropy(other, mu0)).epsilon(0.05));
    CHECK(r.rate > 0.0);
  }
  SUBCASE("constant non-equilibrium curve") {
    const auto r = ldp_rate(constant_curve(mu0, 11, 0.02), mu0, p);
    const double slope = metric_slope(mu0, p);
    // J >= (T/2) inf slope^2 and I = J / 2 here.
    CHECK(r.dissipation >= 0.5 * 0.2 * slope * slope - 1e-12);
    CHECK(r.rate >= 0.25 * 0.2 * slope * slope - 1e-12);
    CHECK(r.rate > 0.0);
  }
}

TEST_CASE("hydrodynamic harness") {
  const auto p = ModelParams::default_model();
  const Grid g{TorusGrid(32), ThetaGrid(-6.0, 6.0, 128)};
  PdeConfig pc;
  pc.horizon = 0.1;
  pc.output_interval = 0.05;
  const auto ref = solve_pde(gaussian_measure(g, 0.3, 0.8, 0.3), p, pc);
  HydroConfig cfg;
  cfg.n_ladder = {8, 32, 5};
  cfg.seeds = {1, 2, 3};
  cfg.times = {0.05, 0.1};
  cfg.pde = pc;
  const auto rows = hydrodynamic_gap(ref.curve, p, cfg);
  int failed = 0;
  for (const auto& r : rows) {
    if (!r.error.empty()) {
      ++failed;
      CHECK(r.n == 5);
    }
  }
  CHECK(failed == 1);
  double gap8 = -1, gap32 = -1;
  for (const auto& r : rows) {
    if (r.t == 0.0 && r.error.empty()) (r.n == 8 ? gap8 : gap32) = r.gap;
  }
  CHECK(gap32 < gap8);
  const auto dir = std::filesystem::temp_directory_path() / "fibered_hydro_test";
  std::filesystem::create_directories(dir);
  write_hydro_table(dir / "h.csv", rows);
  std::ifstream in(dir / "h.csv");
  std::string header;
  std::getline(in, header);
  CHECK(header == "N,t,gap,w2,seeds");
  std::filesystem::remove_all(dir);
}

TEST_CASE("hydrodynamic harness without coupling follows the sampling rate") {
  // J = 0: particles are i.i.d. per site, so W2 decays like N^{-1/2}.
  const auto free = double_well();
  const Grid g{TorusGrid(512), ThetaGrid(-6.0, 6.0, 128)};
  PdeConfig pc;
  pc.horizon = 0.1;
  pc.output_interval = 0.05;
  const auto ref = solve_pde(gaussian_measure(g, 0.3, 0.8, 0.3), free, pc);
  HydroConfig cfg;
  cfg.n_ladder = {32, 64, 128, 256, 512};
  for (std::uint64_t s = 1; s <= 16; ++s) cfg.seeds.push_back(s);
  cfg.times = {0.1};
  cfg.blocks = 8;
  cfg.pde = pc;
  const auto rows = hydrodynamic_gap(ref.curve, free, cfg);
  std::vector<double> lx, ly;
  for (const auto& r : rows) {
    if (r.t > 0.0) {
      lx.push_back(std::log(static_cast<double>(r.n)));
      ly.push_back(std::log(r.w2));
    }
  }
  REQUIRE(lx.size() == 5);
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) mx += lx[k] / 5, my += ly[k] / 5;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) sxy += (lx[k] - mx) * (ly[k] - my), sxx += (lx[k] - mx) * (lx[k] - mx);
  const double slope = sxy / sxx;
  CHECK(slope >= -0.65);
  CHECK(slope <= -0.35);
}
