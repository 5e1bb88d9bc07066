#include "fibered/pde.hpp"

#include <algorithm>
#include <cmath>

#include "fibered/functionals.hpp"
#include "fibered/io.hpp"
#include "fibered/transport.hpp"

namespace fibered {

FluxScheme parse_flux_scheme(const std::string& name) {
  if (name == "exponential-fitting" || name == "exponential_fitting" || name == "sg") {
    return FluxScheme::exponential_fitting;
  }
  if (name == "central") return FluxScheme::central;
  throw std::invalid_argument("unknown flux scheme '" + name + "' (expected exponential-fitting or central)");
}

std::string to_string(FluxScheme s) {
  return s == FluxScheme::central ? "central" : "exponential-fitting";
}

double bernoulli(double z) {
  if (std::abs(z) < 1e-8) return 1.0 - 0.5 * z;
  return z / std::expm1(z);
}

namespace {

struct Stencil {
  double h = 0.0;
  std::vector<double> theta;      // cell centers
  std::vector<double> psi;        // Psi at centers
  std::vector<double> dpsi_edge;  // Psi' at interior edges
};

Stencil make_stencil(const ThetaGrid& tg, const ModelParams& p) {
  Stencil s;
  s.h = tg.dtheta();
  for (int j = 0; j < tg.n_theta; ++j) {
    s.theta.push_back(tg.center(j));
    s.psi.push_back(p.psi()(tg.center(j)));
  }
  for (int e = 1; e < tg.n_theta; ++e) s.dpsi_edge.push_back(p.psi().derivative(tg.edge(e)));
  return s;
}

// Largest diagonal loss rate (times h^2) of one fiber at magnetization m.
double loss_rate(const Stencil& s, double m, FluxScheme scheme) {
  const std::size_t n = s.theta.size();
  double worst = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double r = 0.0;
    if (scheme == FluxScheme::exponential_fitting) {
      if (j + 1 < n) r += bernoulli(s.psi[j + 1] - s.psi[j] - m * s.h);
      if (j > 0) r += bernoulli(-(s.psi[j] - s.psi[j - 1] - m * s.h));
    } else {
      if (j + 1 < n) r += 1.0 + 0.5 * s.h * std::abs(s.dpsi_edge[j] - m);
      if (j > 0) r += 1.0 + 0.5 * s.h * std::abs(s.dpsi_edge[j - 1] - m);
    }
    worst = std::max(worst, r);
  }
  return worst;
}

std::vector<double> means_of(const std::vector<double>& rho, const Grid& g, const Stencil& s) {
  const auto nt = static_cast<std::size_t>(g.n_theta());
  std::vector<double> means(static_cast<std::size_t>(g.n_x()));
  for (std::size_t i = 0; i < means.size(); ++i) {
    double a = 0.0;
    for (std::size_t j = 0; j < nt; ++j) a += s.theta[j] * rho[i * nt + j];
    means[i] = a * s.h;
  }
  return means;
}

// One explicit step in place.
void advance(std::vector<double>& rho, const Grid& g, const Stencil& s, const Kernel& kernel, double dt,
             FluxScheme scheme, long step, std::vector<double>& flux) {
  const auto nt = static_cast<std::size_t>(g.n_theta());
  const auto mag = magnetization_from_means(means_of(rho, g, s), kernel);
  const double h = s.h;
  flux.assign(nt + 1, 0.0);
  for (std::size_t i = 0; i < static_cast<std::size_t>(g.n_x()); ++i) {
    double* r = rho.data() + i * nt;
    const double m = mag.values[i];
    for (std::size_t e = 0; e + 1 < nt; ++e) {
      double f;
      if (scheme == FluxScheme::exponential_fitting) {
        const double delta = s.psi[e + 1] - s.psi[e] - m * h;
        const double bp = bernoulli(delta);
        // B(-z) = B(z) + z
        f = -((bp + delta) * r[e + 1] - bp * r[e]) / h;
      } else {
        f = -(r[e + 1] - r[e]) / h - 0.5 * (s.dpsi_edge[e] - m) * (r[e] + r[e + 1]);
      }
      flux[e + 1] = f;
    }
    for (std::size_t j = 0; j < nt; ++j) {
      double v = r[j] - dt / h * (flux[j + 1] - flux[j]);
      if (!std::isfinite(v) || v < -1e-12) {
        throw IntegrationFailure("pde_step: " + std::string(std::isfinite(v) ? "negative" : "non-finite") +
                                     " density in fiber " + std::to_string(i) + " at step " +
                                     std::to_string(step),
                                 step);
      }
      r[j] = std::max(v, 0.0);
    }
  }
}

}  // namespace

double stability_bound(const Grid& grid, const ModelParams& p, FluxScheme scheme) {
  const auto s = make_stencil(grid.theta, p);
  const double mmax = p.kernel().sup_norm() * std::max(std::abs(grid.theta.theta_min), std::abs(grid.theta.theta_max));
  const double rate = std::max(loss_rate(s, mmax, scheme), loss_rate(s, -mmax, scheme));
  return s.h * s.h / rate;
}

GridMeasure pde_step(const GridMeasure& mu, const ModelParams& p, double dt, FluxScheme scheme) {
  if (!(dt > 0.0)) throw std::invalid_argument("pde_step: dt must be positive");
  const auto s = make_stencil(mu.grid().theta, p);
  std::vector<double> rho(mu.data().begin(), mu.data().end());
  std::vector<double> flux;
  advance(rho, mu.grid(), s, p.kernel(), dt, scheme, 0, flux);
  return GridMeasure(mu.grid(), std::move(rho), kDynamicsTolerance);
}

Observables observe(double t, const GridMeasure& mu, const ModelParams& p) {
  Observables o;
  o.t = t;
  const auto f = free_energy_parts(mu, p);
  o.free_energy = f.total;
  o.entropy = f.entropy;
  o.potential = f.potential;
  o.interaction = f.interaction;
  o.slope = metric_slope(mu, p);
  o.fiber_mass_error = mu.fiber_mass_error();
  const int nt = mu.n_theta();
  const double h = mu.grid().theta.dtheta();
  for (int i = 0; i < mu.n_x(); ++i) {
    o.boundary_mass = std::max(o.boundary_mass, (mu.rho(i, 0) + mu.rho(i, nt - 1)) * h);
  }
  return o;
}

void attach_metric_derivatives(const MeasureCurve& curve, std::vector<Observables>& obs) {
  if (curve.size() < 2) return;
  for (std::size_t k = 0; k < obs.size() && k < curve.size(); ++k) {
    obs[k].metric_derivative = metric_derivative(curve, k).value;
  }
}

void write_observables(const std::filesystem::path& path, const std::vector<Observables>& obs) {
  CsvWriter w(path, {"t", "free_energy", "entropy", "potential", "interaction", "slope", "metric_derivative",
                     "fiber_mass_error", "boundary_mass"});
  for (const auto& o : obs) {
    w.cell(o.t).cell(o.free_energy).cell(o.entropy).cell(o.potential).cell(o.interaction).cell(o.slope);
    w.cell(o.metric_derivative).cell(o.fiber_mass_error).cell(o.boundary_mass);
    w.end_row();
  }
}

PdeResult solve_pde(const GridMeasure& mu0, const ModelParams& p, const PdeConfig& cfg) {
  if (!(cfg.horizon > 0.0) || !(cfg.output_interval > 0.0)) {
    throw std::invalid_argument("solve_pde: horizon and output interval must be positive");
  }
  const double ratio = cfg.horizon / cfg.output_interval;
  const long outputs = std::lround(ratio);
  if (outputs < 1 || std::abs(ratio - static_cast<double>(outputs)) > 1e-9 * ratio) {
    throw std::invalid_argument("solve_pde: horizon must be a multiple of the output interval");
  }
  if (!std::isfinite(free_energy(mu0, p))) throw std::invalid_argument("solve_pde: initial free energy is not finite");

  const auto& grid = mu0.grid();
  const double bound = stability_bound(grid, p, cfg.scheme);
  double dt = cfg.dt;
  if (dt <= 0.0) {
    dt = 0.25 * grid.theta.dtheta() * grid.theta.dtheta();
    while (dt > bound) dt *= 0.5;
  } else if (dt > bound) {
    throw std::invalid_argument("solve_pde: dt " + format_real(dt) + " exceeds the stability bound " +
                                format_real(bound));
  }

  const auto s = make_stencil(grid.theta, p);
  for (int attempt = 0;; ++attempt) {
    const long per_output = static_cast<long>(std::ceil(cfg.output_interval / dt - 1e-9));
    const double h_step = cfg.output_interval / static_cast<double>(per_output);
    PdeResult out;
    out.dt = h_step;
    out.stability_bound = bound;
    out.halvings = attempt;
    try {
      std::vector<double> rho(mu0.data().begin(), mu0.data().end());
      std::vector<double> flux;
      out.curve.push_back(0.0, mu0);
      out.observables.push_back(observe(0.0, mu0, p));
      long step = 0;
      for (long k = 1; k <= outputs; ++k) {
        for (long q = 0; q < per_output; ++q) advance(rho, grid, s, p.kernel(), h_step, cfg.scheme, ++step, flux);
        const double t = static_cast<double>(k) * cfg.output_interval;
        GridMeasure state(grid, rho, kDynamicsTolerance);
        out.observables.push_back(observe(t, state, p));
        out.curve.push_back(t, std::move(state));
      }
      out.steps = step;
      attach_metric_derivatives(out.curve, out.observables);
      return out;
    } catch (const IntegrationFailure&) {
      if (attempt >= cfg.max_halvings) throw;
      dt *= 0.5;
    }
  }
}

}  // namespace fibered
