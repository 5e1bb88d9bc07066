#include "fibered/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <toml.hpp>

#include "fibered/functionals.hpp"
#include "fibered/io.hpp"
#include "fibered/jko.hpp"
#include "fibered/micro.hpp"
#include "fibered/particles.hpp"
#include "fibered/transport.hpp"

namespace fibered {

bool RunOutcome::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

namespace fs = std::filesystem;

struct Context {
  const RunConfig& cfg;
  fs::path out;
  std::ostream& log;
  RunOutcome outcome;

  fs::path file(const std::string& name) {
    outcome.files.push_back(name);
    return out / name;
  }

  void check(std::string name, bool passed, std::string detail) {
    CheckResult r;
    r.id = static_cast<int>(outcome.checks.size()) + 1;
    r.name = std::move(name);
    r.passed = passed;
    r.detail = std::move(detail);
    outcome.checks.push_back(r);
  }
};

// Largest uphill step of the free energy along the observables.
double max_rise(const std::vector<Observables>& obs) {
  double rise = 0.0;
  for (std::size_t k = 1; k < obs.size(); ++k) rise = std::max(rise, obs[k].free_energy - obs[k - 1].free_energy);
  return rise;
}

void write_states(Context& ctx, const MeasureCurve& curve) {
  if (!ctx.cfg.write_states) return;
  fs::create_directories(ctx.out / "states");
  for (std::size_t k = 0; k < curve.size(); ++k) {
    char name[32];
    std::snprintf(name, sizeof name, "states/state_%05zu.csv", k);
    write_grid_measure(ctx.file(name), curve.state(k));
    ctx.outcome.files.push_back(fs::path(name).replace_extension(".json").string());
  }
}

void curve_checks(Context& ctx, const std::vector<Observables>& obs, const MeasureCurve& curve) {
  const double rise = max_rise(obs);
  ctx.check("free energy non-increasing", rise <= ctx.cfg.checks.energy_slack,
            "max rise = " + format_real(rise) + " (slack " + format_real(ctx.cfg.checks.energy_slack) + ")");
  double mass = 0.0, low = 0.0;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    mass = std::max(mass, curve.state(k).fiber_mass_error());
    low = std::min(low, curve.state(k).min_density());
  }
  ctx.check("fiber masses conserved", mass <= 1e-10, "max |fiber mass - 1| = " + format_real(mass));
  double edge = 0.0;
  for (const auto& o : obs) edge = std::max(edge, o.boundary_mass);
  ctx.check("boundary mass", edge < 1e-8, "max mass in the outer cells = " + format_real(edge));
  ctx.check("density nonnegative", low >= 0.0, "min density = " + format_real(low));
  if (ctx.cfg.checks.final_slope_below) {
    const double s = obs.back().slope;
    ctx.check("final slope", s < *ctx.cfg.checks.final_slope_below,
              "|dF|(T) = " + format_real(s) + " (bound " + format_real(*ctx.cfg.checks.final_slope_below) + ")");
  }
}

void run_pde(Context& ctx, const ModelParams& p) {
  const auto grid = make_grid(ctx.cfg.grid);
  const auto run = solve_pde(make_initial(grid, ctx.cfg.initial, p), p, ctx.cfg.pde);
  write_observables(ctx.file("observables.csv"), run.observables);
  write_grid_measure(ctx.file("final.csv"), run.curve.back());
  ctx.outcome.files.push_back("final.json");
  write_states(ctx, run.curve);
  ctx.log << "pde: dt = " << format_real(run.dt) << ", steps = " << run.steps << ", halvings = " << run.halvings
          << ", final slope = " << format_real(run.observables.back().slope) << "\n";
  curve_checks(ctx, run.observables, run.curve);
}

void run_jko(Context& ctx, const ModelParams& p) {
  const auto grid = make_grid(ctx.cfg.grid);
  const auto run = solve_jko(make_initial(grid, ctx.cfg.initial, p), p, ctx.cfg.jko, ctx.cfg.jko_horizon);
  write_observables(ctx.file("observables.csv"), run.observables);
  write_jko_diagnostics(ctx.file("jko_diag.csv"), run.diagnostics);
  write_grid_measure(ctx.file("final.csv"), run.curve.back());
  ctx.outcome.files.push_back("final.json");
  write_states(ctx, run.curve);
  double worst = 0.0;
  for (const auto& d : run.diagnostics) worst = std::min(worst, d.decrease);
  ctx.check("JKO objective decreases", worst >= 0.0, "min decrease = " + format_real(worst));
  curve_checks(ctx, run.observables, run.curve);
}

void run_particles(Context& ctx, const ModelParams& p) {
  const auto& ps = ctx.cfg.particles;
  const Grid grid{TorusGrid(ps.n), ThetaGrid(ctx.cfg.grid.theta_min, ctx.cfg.grid.theta_max, ctx.cfg.grid.n_theta)};
  const auto rec = recovery_sequence(make_initial(grid, ctx.cfg.initial, p), ps.n);
  CsvWriter summary(ctx.file("particles_summary.csv"), {"seed", "t", "mean", "second_moment", "drift_energy"});
  bool finite = true;
  for (auto seed : ps.seeds) {
    SimulateOptions opts;
    opts.record_every = ps.record_every;
    const auto traj = simulate(sample_product(rec, seed), p, ps.dt, ps.horizon, seed, opts);
    write_trajectory(ctx.file("trajectory_seed" + std::to_string(seed) + ".csv"), traj);
    for (std::size_t m = 0; m < traj.states.size(); ++m) {
      const auto& th = traj.states[m].thetas;
      double s1 = 0.0, s2 = 0.0;
      for (double v : th) {
        finite = finite && std::isfinite(v);
        s1 += v;
        s2 += v * v;
      }
      const double n = static_cast<double>(th.size());
      summary.cell(static_cast<long long>(seed)).cell(traj.times[m]).cell(s1 / n).cell(s2 / n);
      summary.cell(drift_energy(traj.states[m], p) / n).end_row();
    }
  }
  ctx.check("trajectories finite", finite, std::to_string(ps.seeds.size()) + " seeds, N = " + std::to_string(ps.n));
}

MeasureCurve gradient_flow(Context& ctx, const ModelParams& p, std::vector<Observables>* obs = nullptr) {
  const auto grid = make_grid(ctx.cfg.grid);
  auto run = solve_pde(make_initial(grid, ctx.cfg.initial, p), p, ctx.cfg.pde);
  if (obs) *obs = run.observables;
  return std::move(run.curve);
}

void run_dissipation(Context& ctx, const ModelParams& p) {
  const auto curve = gradient_flow(ctx, p);
  const auto fwd = dissipation(curve, p);
  const auto bwd = dissipation(curve.reversed(), p);
  write_report_json(ctx.file("dissipation.json"), fwd);
  write_report_table(ctx.file("dissipation.txt"), fwd);
  write_report_json(ctx.file("dissipation_reversed.json"), bwd);
  const double rel = std::abs(fwd.residual) / fwd.slope_integral;
  ctx.check("energy identity on the gradient flow", rel <= ctx.cfg.checks.dissipation_relative,
            "|J| / int|dF|^2 = " + format_real(rel) + " (bound " + format_real(ctx.cfg.checks.dissipation_relative) + ")");
  const double swap = 2.0 * (fwd.energy_start - fwd.energy_end);
  ctx.check("time-reversal identity", std::abs(bwd.residual - swap) <= 2.0 * std::abs(fwd.residual) + 1e-12,
            "J(reversed) = " + format_real(bwd.residual) + ", 2(F(0) - F(T)) = " + format_real(swap));
}

void run_rate(Context& ctx, const ModelParams& p) {
  const auto curve = gradient_flow(ctx, p);
  const auto& ref = curve.front();
  const auto fwd = ldp_rate(curve, ref, p);
  const auto bwd = ldp_rate(curve.reversed(), ref, p);
  nlohmann::json j;
  auto put = [](const RateReport& r) {
    return nlohmann::json{{"dissipation", r.dissipation}, {"initial_entropy", r.initial_entropy}, {"rate", r.rate}};
  };
  j["gradient_flow"] = put(fwd);
  j["reversed"] = put(bwd);
  std::ofstream(ctx.file("rate.json")) << j.dump(2) << "\n";
  const double eps = std::abs(fwd.dissipation);
  ctx.check("rate zero on the gradient flow", fwd.rate <= eps, "I = " + format_real(fwd.rate) + ", |J| = " + format_real(eps));
  ctx.check("rate positive on the reversed curve", bwd.rate > 5.0 * eps, "I(reversed) = " + format_real(bwd.rate));
}

void run_hydro(Context& ctx, const ModelParams& p) {
  const auto& cfg = ctx.cfg;
  const Grid grid{TorusGrid(cfg.ladder_n_x), ThetaGrid(cfg.grid.theta_min, cfg.grid.theta_max, cfg.grid.n_theta)};
  HydroConfig hc = cfg.ladder;
  hc.pde = cfg.pde;
  hc.pde.horizon = *std::max_element(hc.times.begin(), hc.times.end());
  const auto ref = solve_pde(make_initial(grid, cfg.initial, p), p, hc.pde);
  const auto rows = hydrodynamic_gap(ref.curve, p, hc);
  write_hydro_table(ctx.file("hydro.csv"), rows);
  for (const auto& r : rows) {
    if (!r.error.empty()) ctx.check("ladder entry N = " + std::to_string(r.n), false, r.error);
  }
  auto trend = [&](double t, bool gap) {
    std::vector<double> v;
    for (int n : hc.n_ladder) {
      for (const auto& r : rows) {
        if (r.error.empty() && r.n == n && std::abs(r.t - t) < 1e-12) v.push_back(gap ? r.gap : r.w2);
      }
    }
    bool ok = v.size() == hc.n_ladder.size();
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (k > 0) ok = ok && v[k] < v[k - 1];
      s += (k ? ", " : "") + format_real(v[k]);
    }
    return std::pair{ok, "[" + s + "]"};
  };
  for (double t : hc.times) {
    auto [ok, s] = trend(t, false);
    char label[64];
    std::snprintf(label, sizeof label, "W2 decreasing in N at t = %g", t);
    ctx.check(label, ok, s);
  }
  auto [ok, s] = trend(0.0, true);
  ctx.check("free-energy gap decreasing in N at t = 0", ok, s);
}

void run_counterexample(Context& ctx) {
  const auto [mu, nu] = counterexample_pair(ctx.cfg.grid.n_x);
  const double wl = wl_distance(mu, nu);
  const double w2 = w2_flattened(mu, nu);
  auto show = [](double v) { return v == std::floor(v) ? std::to_string(static_cast<long long>(v)) + ".0" : format_real(v); };
  ctx.log << "W^L = " << show(wl) << "\nW2 = " << show(w2) << " (bound 0.25)\n";
  CsvWriter w(ctx.file("counterexample.csv"), {"n_x", "wl", "w2"});
  w.cell(ctx.cfg.grid.n_x).cell(wl).cell(w2).end_row();
  ctx.check("W^L equals 1", wl == 1.0, "W^L = " + format_real(wl));
  ctx.check("W2 bound <= 0.25", w2 <= 0.25 + 1e-9, "W2 = " + format_real(w2));
}

void run_check(Context& ctx, const ModelParams& p) {
  SuiteOptions opts;
  opts.quick = ctx.cfg.checks.quick;
  opts.hydro_n_x = ctx.cfg.ladder_n_x;
  opts.hydro_seeds = static_cast<int>(ctx.cfg.ladder.seeds.size());
  const auto grid = make_grid(ctx.cfg.grid);
  ctx.outcome.checks = run_suite(p, grid, opts, [&](const CheckResult& r) { ctx.log << format_check(r) << std::endl; });
}

std::string compiler() {
#if defined(__clang__)
  return "clang " __clang_version__;
#elif defined(__GNUC__)
  return "gcc " __VERSION__;
#else
  return "unknown";
#endif
}

}  // namespace

RunOutcome run_experiment(const RunConfig& cfg, const fs::path& out, std::ostream& log) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(out);
  Context ctx{cfg, out, log, {}};
  const auto p = make_model(cfg);
  const auto& e = cfg.experiment;
  if (e == "pde") {
    run_pde(ctx, p);
  } else if (e == "jko") {
    run_jko(ctx, p);
  } else if (e == "particles") {
    run_particles(ctx, p);
  } else if (e == "dissipation") {
    run_dissipation(ctx, p);
  } else if (e == "rate") {
    run_rate(ctx, p);
  } else if (e == "hydro-ladder") {
    run_hydro(ctx, p);
  } else if (e == "counterexample") {
    run_counterexample(ctx);
  } else if (e == "check") {
    run_check(ctx, p);
  } else {
    throw ConfigError("experiment: unknown experiment '" + e + "'");
  }
  auto& outcome = ctx.outcome;
  outcome.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  if (e != "check") {
    for (const auto& c : outcome.checks) log << format_check(c) << "\n";
  }
  {
    std::ofstream txt(out / "checks.txt");
    for (const auto& c : outcome.checks) txt << format_check(c) << "\n";
  }
  nlohmann::json m;
  m["experiment"] = e;
  m["config"] = cfg.source;
  m["versions"] = {{"fibered", kVersion},
                   {"compiler", compiler()},
                   {"toml++", std::to_string(TOML_LIB_MAJOR) + "." + std::to_string(TOML_LIB_MINOR) + "." +
                                  std::to_string(TOML_LIB_PATCH)},
                   {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                         std::to_string(NLOHMANN_JSON_VERSION_PATCH)}};
  m["wall_time_seconds"] = outcome.wall_seconds;
  m["files"] = outcome.files;
  for (const auto& c : outcome.checks) {
    m["checks"].push_back({{"id", c.id}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
  }
  m["ok"] = outcome.ok();
  std::ofstream(out / "manifest.json") << m.dump(2) << "\n";
  return outcome;
}

}  // namespace fibered
