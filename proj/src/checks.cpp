#include "fibered/checks.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <sstream>

#include "fibered/functionals.hpp"
#include "fibered/io.hpp"
#include "fibered/jko.hpp"
#include "fibered/micro.hpp"
#include "fibered/particles.hpp"
#include "fibered/transport.hpp"

namespace fibered {

namespace {

using Clock = std::chrono::steady_clock;

std::size_t sample_index(const MeasureCurve& c, double t) {
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(c.time(k) - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  }
  throw std::invalid_argument("checks: curve has no sample at t = " + format_real(t));
}

template <class F>
CheckResult timed(int id, std::string name, F&& body) {
  const auto t0 = Clock::now();
  CheckResult r;
  r.id = id;
  r.name = std::move(name);
  try {
    body(r);
  } catch (const std::exception& e) {
    r.passed = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
  return r;
}

std::string brief(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + brief(v[k]);
  return s;
}

}  // namespace

GridMeasure random_measure(const Grid& grid, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mean(-2.0, 2.0), width(0.25, 1.0), weight(0.2, 1.0);
  std::vector<double> raw;
  raw.reserve(grid.size());
  for (int i = 0; i < grid.n_x(); ++i) {
    const double m1 = mean(rng), m2 = mean(rng), s1 = width(rng), s2 = width(rng), w1 = weight(rng), w2 = weight(rng);
    for (int j = 0; j < grid.n_theta(); ++j) {
      const double t = grid.theta.center(j);
      raw.push_back(w1 * std::exp(-0.5 * (t - m1) * (t - m1) / (s1 * s1)) / s1 +
                    w2 * std::exp(-0.5 * (t - m2) * (t - m2) / (s2 * s2)) / s2);
    }
  }
  return normalize_fibers(grid, std::move(raw));
}

DiscreteFiber random_discrete(std::mt19937_64& rng, int max_atoms) {
  std::uniform_int_distribution<int> count(1, max_atoms);
  std::uniform_real_distribution<double> loc(-3.0, 3.0), mass(0.05, 1.0);
  const int n = count(rng);
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    atoms.push_back({loc(rng), mass(rng)});
    total += atoms.back().mass;
  }
  for (auto& a : atoms) a.mass /= total;
  return DiscreteFiber(std::move(atoms));
}

GridMeasure gaussian_measure(const Grid& grid, double mean, double amplitude, double variance) {
  std::vector<double> raw;
  raw.reserve(grid.size());
  for (int i = 0; i < grid.n_x(); ++i) {
    const double a = mean + amplitude * std::cos(2.0 * std::numbers::pi * grid.torus.site(i));
    for (int j = 0; j < grid.n_theta(); ++j) {
      const double t = grid.theta.center(j) - a;
      raw.push_back(std::exp(-t * t / (2.0 * variance)));
    }
  }
  return normalize_fibers(grid, std::move(raw));
}

std::pair<FiberedDiscreteMeasure, FiberedDiscreteMeasure> counterexample_pair(int n_x) {
  if (n_x < 2 || n_x % 2 != 0) throw std::invalid_argument("counterexample_pair: n_x must be even");
  FiberedDiscreteMeasure mu{TorusGrid(n_x), {}}, nu{TorusGrid(n_x), {}};
  for (int i = 0; i < n_x; ++i) {
    const bool in_a = i < n_x / 2;
    mu.fibers.push_back(DiscreteFiber::dirac(in_a ? 0.0 : 1.0));
    nu.fibers.push_back(DiscreteFiber::dirac(in_a ? 1.0 : 0.0));
  }
  return {std::move(mu), std::move(nu)};
}

EnergyLadder energy_ladder(const ModelParams& p, const LadderSpec& spec) {
  if (spec.n_theta.size() != spec.output_interval.size() || spec.n_theta.empty()) {
    throw std::invalid_argument("energy_ladder: n_theta and output_interval lengths differ");
  }
  EnergyLadder out;
  for (std::size_t l = 0; l < spec.n_theta.size(); ++l) {
    const Grid grid{TorusGrid(spec.n_x), ThetaGrid(spec.theta_min, spec.theta_max, spec.n_theta[l])};
    auto mu0 = gaussian_measure(grid, 0.3, 0.8, 0.3);
    PdeConfig cfg;
    cfg.horizon = spec.horizon;
    cfg.output_interval = spec.output_interval[l];
    auto run = solve_pde(mu0, p, cfg);
    LadderLevel level{spec.n_theta[l], spec.output_interval[l], run.dt, dissipation(run.curve, p)};
    out.levels.push_back(std::move(level));
    if (l + 1 == spec.n_theta.size()) out.finest = std::move(run.curve);
  }
  out.epsilon_grid = std::abs(out.levels.back().report.residual);
  return out;
}

CheckResult check_counterexample(int n_x) {
  return timed(1, "W^L counterexample", [&](CheckResult& r) {
    const auto [mu, nu] = counterexample_pair(n_x);
    const double wl = wl_distance(mu, nu);
    const double w2 = w2_flattened(mu, nu);
    r.passed = wl == 1.0 && w2 <= 0.25 + 1e-9;
    r.detail = "W^L = " + format_real(wl) + ", W2 = " + format_real(w2) + " (bound 0.25)";
  });
}

CheckResult check_transport_oracle(std::uint64_t seed, int pairs) {
  return timed(2, "1D transport oracle", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
      const auto a = random_discrete(rng, 5), b = random_discrete(rng, 5);
      worst = std::max(worst, std::abs(w2_fiber(a, b) - w2_lp_oracle(a, b)));
    }
    r.passed = worst <= 1e-9;
    r.detail = std::to_string(pairs) + " pairs, max |quantile - LP| = " + format_real(worst);
  });
}

CheckResult check_metric_axioms(std::uint64_t seed, int triples) {
  return timed(3, "metric axioms", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    const Grid grid{TorusGrid(8), ThetaGrid(-6.0, 6.0, 64)};
    double asym = 0.0, self = 0.0, triangle = -1e300;
    for (int k = 0; k < triples; ++k) {
      const auto a = random_measure(grid, rng), b = random_measure(grid, rng), c = random_measure(grid, rng);
      const double ab = wl_distance(a, b), ba = wl_distance(b, a), bc = wl_distance(b, c), ac = wl_distance(a, c);
      asym = std::max(asym, std::abs(ab - ba));
      self = std::max(self, wl_distance(a, a));
      triangle = std::max(triangle, ac - ab - bc);
    }
    r.passed = asym == 0.0 && self == 0.0 && triangle <= 1e-12;
    r.detail = std::to_string(triples) + " triples, max |d(a,b)-d(b,a)| = " + format_real(asym) +
               ", max d(a,a) = " + format_real(self) + ", max d(a,c)-d(a,b)-d(b,c) = " + format_real(triangle);
  });
}

CheckResult check_geodesic_speed(std::uint64_t seed, int pairs) {
  return timed(4, "geodesic constant speed", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    const Grid grid{TorusGrid(8), ThetaGrid(-6.0, 6.0, 256)};
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
      const auto a = random_measure(grid, rng), b = random_measure(grid, rng);
      const double d = wl_distance(a, b);
      for (int q = 1; q <= 5; ++q) {
        const double t = q / 6.0;
        const auto g = geodesic(a, b, t);
        worst = std::max(worst, std::abs(wl_distance(a, g) - t * d) / (t * d));
        worst = std::max(worst, std::abs(wl_distance(g, b) - (1.0 - t) * d) / ((1.0 - t) * d));
      }
    }
    r.passed = worst <= 0.02;
    r.detail = std::to_string(pairs) + " pairs x 5 times, max relative error = " + format_real(worst);
  });
}

CheckResult check_energy_identity(const EnergyLadder& ladder) {
  return timed(5, "energy identity", [&](CheckResult& r) {
    std::vector<double> res;
    for (const auto& l : ladder.levels) res.push_back(std::abs(l.report.residual));
    bool monotone = true;
    for (std::size_t k = 1; k < res.size(); ++k) monotone = monotone && res[k] < res[k - 1];
    const auto& last = ladder.levels.back().report;
    const double rel = std::abs(last.residual) / last.slope_integral;
    r.passed = monotone && rel < 0.02;
    r.detail = "|J| ladder = [" + join(res) + "], final |J| / int|dF|^2 = " + format_real(rel);
  });
}

CheckResult check_contractivity(const ModelParams& p, const Grid& grid, std::uint64_t seed, int pairs) {
  return timed(6, "lambda-contractivity", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> mean(-0.8, 0.8), amp(0.0, 1.0), var(0.15, 0.6);
    PdeConfig cfg;
    cfg.horizon = 0.5;
    cfg.output_interval = 0.05;
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
      const auto a = gaussian_measure(grid, mean(rng), amp(rng), var(rng));
      const auto b = gaussian_measure(grid, mean(rng), amp(rng), var(rng));
      const auto ra = solve_pde(a, p, cfg), rb = solve_pde(b, p, cfg);
      const double d0 = wl_distance(a, b);
      for (std::size_t n = 0; n < ra.curve.size(); ++n) {
        const double t = ra.curve.time(n);
        const double bound = std::exp(-p.lambda() * t) * d0 * 1.05;
        worst = std::max(worst, wl_distance(ra.curve.state(n), rb.curve.state(n)) / bound);
      }
    }
    r.passed = worst <= 1.0;
    r.detail = std::to_string(pairs) + " pairs, max W^L(t) / bound = " + format_real(worst);
  });
}

CheckResult check_slope_formula(const ModelParams& p, std::uint64_t seed, int measures) {
  return timed(7, "slope formula vs variational slope", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    const Grid grid{TorusGrid(16), ThetaGrid(p.theta_min(), p.theta_max(), 128)};
    const auto family = hermite_fourier_family(grid, 20);
    double excess = -1e300, gap = 0.0;
    for (int k = 0; k < measures; ++k) {
      const auto mu = random_measure(grid, rng);
      const auto field = slope_field(mu, p);
      const double slope = metric_slope(mu, field);
      excess = std::max(excess, variational_slope(mu, p, family) - slope);
      auto with_w = family;
      with_w.push_back(field.w);
      gap = std::max(gap, std::abs(variational_slope(mu, p, with_w) - slope));
    }
    r.passed = excess <= 1e-8 && gap <= 1e-6;
    r.detail = std::to_string(measures) + " measures, max(variational - metric) = " + format_real(excess) +
               ", |variational(w) - metric| <= " + format_real(gap);
  });
}

CheckResult check_jko_pde(const ModelParams& p, const Grid& grid) {
  return timed(8, "JKO-PDE consistency", [&](CheckResult& r) {
    const auto mu0 = gaussian_measure(grid, 0.3, 0.8, 0.3);
    PdeConfig pc;
    pc.horizon = 0.5;
    pc.output_interval = 0.025;
    const auto ref = solve_pde(mu0, p, pc);
    std::vector<double> gaps;
    for (double tau : {0.1, 0.05, 0.025}) {
      JkoConfig jc;
      jc.tau = tau;
      const auto run = solve_jko(mu0, p, jc, 0.5);
      double sup = 0.0;
      for (std::size_t n = 0; n < run.curve.size(); ++n) {
        sup = std::max(sup, wl_distance(run.curve.state(n), ref.curve.state(sample_index(ref.curve, run.curve.time(n)))));
      }
      gaps.push_back(sup);
    }
    r.passed = gaps[1] < gaps[0] && gaps[2] < gaps[1];
    r.detail = "sup_t W^L(jko, pde) at tau = 0.1, 0.05, 0.025: [" + join(gaps) + "]";
  });
}

CheckResult check_k_vs_l(std::uint64_t seed, int states) {
  return timed(9, "K^N vs L^N coupling", [&](CheckResult& r) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 2.0);
    bool ok = true;
    std::string worst;
    for (int n : {1, 2, 10, 100, 1000}) {
      double top = 0.0;
      for (int k = 0; k < states; ++k) {
        ParticleState s;
        for (int i = 0; i < n; ++i) s.thetas.push_back(normal(rng));
        const double c = k_vs_l_distance(s);
        top = std::max(top, c);
        ok = ok && c <= 1.0 / n;
      }
      worst += (worst.empty() ? "" : ", ") + ("N=" + std::to_string(n) + ": " + format_real(top * n));
    }
    r.passed = ok;
    r.detail = "max N * cost per N (must be <= 1): " + worst;
  });
}

CheckResult check_hydro(const ModelParams& p, const HydroConfig& cfg, int n_x, const ThetaGrid& theta) {
  return timed(10, "hydrodynamic trend", [&](CheckResult& r) {
    const Grid grid{TorusGrid(n_x), theta};
    PdeConfig pc = cfg.pde;
    pc.horizon = *std::max_element(cfg.times.begin(), cfg.times.end());
    const auto ref = solve_pde(gaussian_measure(grid, 0.3, 0.8, 0.3), p, pc);
    const auto rows = hydrodynamic_gap(ref.curve, p, cfg);
    std::ostringstream os;
    bool ok = true;
    for (const auto& row : rows) {
      if (!row.error.empty()) {
        ok = false;
        os << " N=" << row.n << " failed: " << row.error << ";";
      }
    }
    auto series = [&](double t, bool gap) {
      std::vector<double> v;
      for (int n : cfg.n_ladder) {
        for (const auto& row : rows) {
          if (row.error.empty() && row.n == n && std::abs(row.t - t) < 1e-12) v.push_back(gap ? row.gap : row.w2);
        }
      }
      return v;
    };
    auto decreasing = [&](const std::vector<double>& v) {
      if (v.size() != cfg.n_ladder.size()) return false;
      for (std::size_t k = 1; k < v.size(); ++k) {
        if (!(v[k] < v[k - 1])) return false;
      }
      return true;
    };
    for (double t : cfg.times) {
      const auto w = series(t, false);
      ok = ok && decreasing(w);
      os << " W2(t=" << brief(t) << ") = [" << join(w) << "];";
    }
    const auto g0 = series(0.0, true);
    ok = ok && decreasing(g0);
    os << " gap(t=0) = [" << join(g0) << "]";
    r.passed = ok;
    r.detail = "seeds = " + std::to_string(cfg.seeds.size()) + ";" + os.str();
  });
}

CheckResult check_rate_zero(const EnergyLadder& ladder, const ModelParams& p) {
  return timed(11, "rate-function zero", [&](CheckResult& r) {
    const double eps = ladder.epsilon_grid;
    const auto forward = ldp_rate(ladder.finest, ladder.finest.front(), p);
    const auto backward = ldp_rate(ladder.finest.reversed(), ladder.finest.front(), p);
    r.passed = forward.rate < eps && backward.rate > 5.0 * eps;
    r.detail = "eps_grid = " + format_real(eps) + ", I(flow) = " + format_real(forward.rate) +
               ", I(reversed) = " + format_real(backward.rate);
  });
}

CheckResult check_equilibrium(const ModelParams& p, const Grid& grid) {
  return timed(12, "equilibrium fixed point", [&](CheckResult& r) {
    const auto free = p.with_kernel(Kernel::constant(0.0));
    const auto gibbs = gibbs_measure(grid, free);
    const double dt = 0.5 * stability_bound(grid, free, FluxScheme::exponential_fitting);
    const auto after = pde_step(gibbs, free, dt);
    double cell = 0.0;
    for (std::size_t k = 0; k < gibbs.data().size(); ++k) cell = std::max(cell, std::abs(after.data()[k] - gibbs.data()[k]));
    const auto jko = jko_step(gibbs, free, JkoConfig{});
    const double jko_move = wl_distance(jko.state, gibbs);
    const double slope = metric_slope(gibbs, free);
    const Grid fine{grid.torus, ThetaGrid(grid.theta.theta_min, grid.theta.theta_max, 2 * grid.n_theta())};
    const double slope_fine = metric_slope(gibbs_measure(fine, free), free);
    r.passed = cell <= 1e-8 && jko_move <= 1e-6 && slope < 0.05 && slope_fine < 0.01;
    r.detail = "pde_step max cell change = " + format_real(cell) + ", jko_step W^L = " + format_real(jko_move) +
               ", slope = " + format_real(slope) + " (n_theta " + std::to_string(grid.n_theta()) + "), " +
               format_real(slope_fine) + " (n_theta " + std::to_string(fine.n_theta()) + ")";
  });
}

std::vector<CheckResult> run_suite(const ModelParams& p, const Grid& grid, const SuiteOptions& opts,
                                   const std::function<void(const CheckResult&)>& on_result) {
  std::vector<CheckResult> out;
  auto emit = [&](CheckResult r) {
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  };
  auto skipped = [&](int id, const char* name) {
    CheckResult r{id, name, true, "skipped (quick mode)", 0.0};
    emit(std::move(r));
  };
  emit(check_counterexample());
  emit(check_transport_oracle(opts.seed));
  emit(check_metric_axioms(opts.seed + 1));
  emit(check_geodesic_speed(opts.seed + 2));

  std::optional<EnergyLadder> ladder;
  if (opts.quick) {
    skipped(5, "energy identity");
  } else {
    const auto t0 = Clock::now();
    try {
      LadderSpec spec;
      spec.n_x = grid.n_x();
      spec.theta_min = grid.theta.theta_min;
      spec.theta_max = grid.theta.theta_max;
      ladder = energy_ladder(p, spec);
      auto r = check_energy_identity(*ladder);
      r.seconds += std::chrono::duration<double>(Clock::now() - t0).count();
      emit(std::move(r));
    } catch (const std::exception& e) {
      emit(CheckResult{5, "energy identity", false, std::string("error: ") + e.what(),
                       std::chrono::duration<double>(Clock::now() - t0).count()});
    }
  }
  emit(check_contractivity(p, grid, opts.seed + 3));
  emit(check_slope_formula(p, opts.seed + 4));
  emit(check_jko_pde(p, grid));
  emit(check_k_vs_l(opts.seed + 5));
  if (opts.quick) {
    skipped(10, "hydrodynamic trend");
  } else {
    HydroConfig hc;
    for (int k = 0; k < opts.hydro_seeds; ++k) hc.seeds.push_back(opts.seed + 100 + static_cast<std::uint64_t>(k));
    hc.pde.horizon = 0.5;
    hc.pde.output_interval = 0.05;
    emit(check_hydro(p, hc, opts.hydro_n_x, grid.theta));
  }
  if (!ladder) {
    if (opts.quick) {
      skipped(11, "rate-function zero");
    } else {
      emit(CheckResult{11, "rate-function zero", false, "error: energy ladder unavailable", 0.0});
    }
  } else {
    emit(check_rate_zero(*ladder, p));
  }
  emit(check_equilibrium(p, grid));
  return out;
}

std::string format_check(const CheckResult& r) {
  std::ostringstream os;
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
  os << (r.passed ? "PASS" : "FAIL") << " [" << r.id << "] " << r.name << ": " << r.detail;
  if (r.seconds > 0.0) os << " (" << secs << " s)";
  return os.str();
}

}  // namespace fibered
