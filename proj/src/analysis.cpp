#include "fibered/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <json.hpp>

#include "fibered/functionals.hpp"
#include "fibered/io.hpp"
#include "fibered/particles.hpp"
#include "fibered/quantile.hpp"
#include "fibered/transport.hpp"

namespace fibered {

namespace {

void integrate(DissipationReport& r) {
  if (r.rows.empty()) return;
  r.energy_start = r.rows.front().energy;
  r.energy_end = r.rows.back().energy;
  for (std::size_t k = 1; k < r.rows.size(); ++k) {
    const double dt = r.rows[k].t - r.rows[k - 1].t;
    r.slope_integral += 0.5 * dt * (r.rows[k].slope_squared + r.rows[k - 1].slope_squared);
    r.speed_integral += 0.5 * dt * (r.rows[k].speed_squared + r.rows[k - 1].speed_squared);
  }
  r.residual = r.energy_end - r.energy_start + 0.5 * (r.slope_integral + r.speed_integral);
}

std::size_t index_of_time(const MeasureCurve& c, double t) {
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(c.time(k) - t) <= 1e-9 * std::max(1.0, std::abs(t))) return k;
  }
  throw std::invalid_argument("curve has no sample at t = " + format_real(t));
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

DissipationReport dissipation(const MeasureCurve& curve, const ModelParams& p) {
  if (curve.size() < 2) throw std::invalid_argument("dissipation: curve needs at least two samples");
  DissipationReport r;
  for (std::size_t k = 0; k < curve.size(); ++k) {
    const auto& mu = curve.state(k);
    const auto w = slope_field(mu, p);
    const double s = metric_slope(mu, w);
    const auto md = metric_derivative(curve, k);
    r.rows.push_back({curve.time(k), free_energy(mu, p), s * s, md.value * md.value, md.one_sided,
                      w.masked_mass > 1e-10});
  }
  integrate(r);
  return r;
}

DissipationReport micro_dissipation(const ProductCurve& curve, const ModelParams& p) {
  const std::size_t m = curve.states.size();
  if (m < 2 || curve.times.size() != m) throw std::invalid_argument("micro_dissipation: need >= 2 timed states");
  const int n = curve.states.front().size();
  for (const auto& s : curve.states) {
    if (s.size() != n) throw std::invalid_argument("micro_dissipation: site count changes along the curve");
  }
  auto sq_distance = [&](std::size_t a, std::size_t b) {
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += w2_squared(QuantileFunction::of(curve.states[a].sites[static_cast<std::size_t>(k)]),
                        QuantileFunction::of(curve.states[b].sites[static_cast<std::size_t>(k)]));
    }
    return acc / n;
  };
  DissipationReport r;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t a = k == 0 ? 0 : k - 1;
    const std::size_t b = k + 1 == m ? k : k + 1;
    const double span = curve.times[b] - curve.times[a];
    r.rows.push_back({curve.times[k], micro_free_energy(curve.states[k], p), micro_slope(curve.states[k], p),
                      sq_distance(a, b) / (span * span), k == 0 || k + 1 == m, false});
  }
  integrate(r);
  return r;
}

RateReport ldp_rate(const MeasureCurve& curve, const GridMeasure& mu0_ref, const ModelParams& p) {
  RateReport r;
  r.dissipation = dissipation(curve, p).residual;
  r.initial_entropy = relative_entropy(curve.front(), mu0_ref);
  r.rate = 0.5 * r.dissipation + r.initial_entropy;
  return r;
}

void write_report_json(const std::filesystem::path& path, const DissipationReport& r) {
  nlohmann::json j;
  j["energy_start"] = r.energy_start;
  j["energy_end"] = r.energy_end;
  j["slope_integral"] = r.slope_integral;
  j["speed_integral"] = r.speed_integral;
  j["residual"] = r.residual;
  for (const auto& row : r.rows) {
    j["rows"].push_back({{"t", row.t}, {"energy", row.energy}, {"slope_squared", row.slope_squared},
                         {"speed_squared", row.speed_squared}, {"one_sided", row.one_sided},
                         {"masked", row.masked}});
  }
  std::ofstream(path) << j.dump(2) << "\n";
}

void write_report_table(const std::filesystem::path& path, const DissipationReport& r) {
  std::ofstream out(path);
  out << std::setw(12) << "t" << std::setw(20) << "energy" << std::setw(20) << "slope^2" << std::setw(20)
      << "speed^2" << "  flags\n";
  out << std::setprecision(10);
  for (const auto& row : r.rows) {
    out << std::setw(12) << row.t << std::setw(20) << row.energy << std::setw(20) << row.slope_squared
        << std::setw(20) << row.speed_squared << "  " << (row.one_sided ? "one-sided " : "")
        << (row.masked ? "masked" : "") << "\n";
  }
  out << "\nF(T) - F(0)      " << r.energy_end - r.energy_start << "\n";
  out << "int |dF|^2 dt    " << r.slope_integral << "\n";
  out << "int |mu'|^2 dt   " << r.speed_integral << "\n";
  out << "residual         " << r.residual << "\n";
}

double block_distance(const ParticleState& s, const GridMeasure& mu, int blocks) {
  const int n = s.size();
  if (blocks < 1 || n % blocks != 0 || mu.n_x() % blocks != 0) {
    throw std::invalid_argument("block_distance: block count must divide N and n_x");
  }
  const auto avg = recovery_sequence(mu, blocks);
  const int per = n / blocks;
  double acc = 0.0;
  for (int b = 0; b < blocks; ++b) {
    std::vector<double> locs(s.thetas.begin() + b * per, s.thetas.begin() + (b + 1) * per);
    acc += w2_squared(QuantileFunction::of(DiscreteFiber::uniform(locs)),
                      QuantileFunction::of(avg.sites[static_cast<std::size_t>(b)]));
  }
  return std::sqrt(acc / blocks);
}

std::vector<HydroRow> hydrodynamic_gap(const MeasureCurve& mu_curve, const ModelParams& p, const HydroConfig& cfg) {
  if (cfg.seeds.empty()) throw std::invalid_argument("hydrodynamic_gap: no seeds");
  const auto& mu0 = mu_curve.front();
  std::vector<HydroRow> rows;
  const double horizon = cfg.times.empty() ? 0.0 : *std::max_element(cfg.times.begin(), cfg.times.end());
  for (int n : cfg.n_ladder) {
    try {
      if (mu0.n_x() % n != 0) {
        throw std::invalid_argument("N = " + std::to_string(n) + " does not divide n_x = " + std::to_string(mu0.n_x()));
      }
      const auto rec = recovery_sequence(mu0, n);
      rows.push_back({n, 0.0, std::abs(micro_free_energy(rec, p) - free_energy(mu0, p)), 0.0, 0, {}});

      // Product surrogate evolved by the per-site Fokker-Planck equation.
      PdeConfig pc = cfg.pde;
      pc.horizon = horizon;
      const auto surrogate = solve_pde(grid_of_product(rec), p, pc);

      std::vector<std::vector<double>> dist(cfg.times.size());
      const long steps = static_cast<long>(std::llround(horizon / cfg.dt));
      for (auto seed : cfg.seeds) {
        const auto theta0 = sample_product(rec, seed);
        SimulateOptions opts;
        const auto traj = simulate(theta0, p, cfg.dt, horizon, seed, opts);
        for (std::size_t q = 0; q < cfg.times.size(); ++q) {
          const auto step = static_cast<std::size_t>(std::llround(cfg.times[q] / cfg.dt));
          if (step > static_cast<std::size_t>(steps)) throw std::logic_error("hydrodynamic_gap: time beyond horizon");
          dist[q].push_back(block_distance(traj.states[step], mu_curve.state(index_of_time(mu_curve, cfg.times[q])),
                                           cfg.blocks));
        }
      }
      for (std::size_t q = 0; q < cfg.times.size(); ++q) {
        const double t = cfg.times[q];
        const auto& mu_t = mu_curve.state(index_of_time(mu_curve, t));
        const auto& sur = surrogate.curve.state(index_of_time(surrogate.curve, t));
        const double gap = std::abs(micro_free_energy(product_of_fibers(sur), p) - free_energy(mu_t, p));
        rows.push_back({n, t, gap, median(dist[q]), static_cast<int>(cfg.seeds.size()), {}});
      }
    } catch (const std::exception& e) {
      rows.push_back({n, 0.0, 0.0, 0.0, 0, e.what()});
    }
  }
  return rows;
}

void write_hydro_table(const std::filesystem::path& path, const std::vector<HydroRow>& rows) {
  CsvWriter w(path, {"N", "t", "gap", "w2", "seeds"});
  for (const auto& r : rows) {
    if (!r.error.empty()) continue;
    w.cell(r.n).cell(r.t).cell(r.gap).cell(r.w2).cell(r.seeds);
    w.end_row();
  }
}

}  // namespace fibered
