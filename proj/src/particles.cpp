#include "fibered/particles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <limits>
#include <string>

#include "fibered/io.hpp"
#include "fibered/rng.hpp"

namespace fibered {

namespace {

constexpr std::uint64_t kSamplingStep = std::numeric_limits<std::uint64_t>::max();

double sample_fiber(const FiberMeasure& f, double u) {
  const auto& g = f.grid();
  double cum = 0.0;
  int last = -1;
  for (int j = 0; j < g.n_theta; ++j) {
    const double m = f.cell_mass(j);
    if (m <= 0.0) continue;
    last = j;
    if (u <= cum + m) return g.edge(j) + g.dtheta() * std::clamp((u - cum) / m, 0.0, 1.0);
    cum += m;
  }
  return g.edge(last + 1);
}

}  // namespace

ParticleTrajectory simulate(const ParticleState& theta0, const ModelParams& p, double dt, double horizon,
                            std::uint64_t seed, const SimulateOptions& opts) {
  if (!(dt > 0.0) || !(horizon > 0.0)) throw std::invalid_argument("simulate: dt and horizon must be positive");
  if (theta0.thetas.empty()) throw std::invalid_argument("simulate: no particles");
  if (opts.record_every < 1) throw std::invalid_argument("simulate: record_every must be >= 1");
  const int n = theta0.size();
  const long steps = static_cast<long>(std::ceil(horizon / dt - 1e-9));
  const auto table = p.kernel().circulant_table(n);
  // ext[n - i + j] = J((i - j) / n), so each row is a contiguous dot product.
  std::vector<double> ext(2 * static_cast<std::size_t>(n));
  for (int k = 0; k < 2 * n; ++k) ext[static_cast<std::size_t>(k)] = table[static_cast<std::size_t>(((n - k) % n + n) % n)];
  const double limit = 10.0 * std::max(std::abs(p.theta_min()), std::abs(p.theta_max()));
  const double noise = std::sqrt(2.0 * dt) * opts.noise_scale;

  ParticleTrajectory traj;
  traj.seed = seed;
  traj.times.push_back(0.0);
  traj.states.push_back(theta0);
  std::vector<double> cur = theta0.thetas, next(cur.size());
  const bool constant = p.kernel().kind() == Kernel::Kind::constant;
  for (long s = 0; s < steps; ++s) {
    const double total = constant ? std::accumulate(cur.begin(), cur.end(), 0.0) : 0.0;
    for (int i = 0; i < n; ++i) {
      double c = 0.0;
      if (constant) {
        c = table[0] * total;
      } else {
        const double* row = ext.data() + (n - i);
        for (int j = 0; j < n; ++j) c += row[j] * cur[static_cast<std::size_t>(j)];
      }
      const double th = cur[static_cast<std::size_t>(i)];
      const double b = -p.psi().derivative(th) + c / n;
      double v = th + b * dt;
      if (noise != 0.0) v += noise * standard_normal(seed, static_cast<std::uint64_t>(i), static_cast<std::uint64_t>(s));
      if (!std::isfinite(v) || std::abs(v) > limit) {
        throw ParticleBlowUp("simulate: particle " + std::to_string(i) + " left |theta| <= " + format_real(limit) +
                                 " at step " + std::to_string(s + 1),
                             s + 1);
      }
      next[static_cast<std::size_t>(i)] = v;
    }
    cur.swap(next);
    if ((s + 1) % opts.record_every == 0 || s + 1 == steps) {
      traj.times.push_back(static_cast<double>(s + 1) * dt);
      traj.states.push_back(ParticleState{cur});
    }
  }
  return traj;
}

void write_trajectory(const std::filesystem::path& path, const ParticleTrajectory& traj) {
  CsvWriter w(path, {"t", "k", "theta"});
  for (std::size_t m = 0; m < traj.states.size(); ++m) {
    const auto& s = traj.states[m];
    for (int k = 0; k < s.size(); ++k) {
      w.cell(traj.times[m]).cell(k).cell(s.thetas[static_cast<std::size_t>(k)]);
      w.end_row();
    }
  }
}

ParticleState sample_product(const ProductMeasure& nu, std::uint64_t seed) {
  ParticleState s;
  s.thetas.reserve(nu.sites.size());
  for (std::size_t k = 0; k < nu.sites.size(); ++k) {
    s.thetas.push_back(sample_fiber(nu.sites[k], draw(seed, k, kSamplingStep).uniform[0]));
  }
  return s;
}

ParticleState sample_initial(const ModelParams& p, const InitialDensity& kappa, const ThetaGrid& tg, int n,
                             std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_initial: N must be >= 1");
  ProductMeasure nu;
  for (int k = 0; k < n; ++k) {
    const double x = static_cast<double>(k) / n;
    std::vector<double> w(static_cast<std::size_t>(tg.n_theta));
    double mass = 0.0;
    for (int j = 0; j < tg.n_theta; ++j) {
      const double t = tg.center(j);
      const double v = kappa(x, t) * std::exp(-p.psi()(t));
      if (!std::isfinite(v) || v < 0.0) {
        throw std::invalid_argument("sample_initial: kappa exp(-Psi) is negative or non-finite at site " +
                                    std::to_string(k));
      }
      w[static_cast<std::size_t>(j)] = v;
      mass += v * tg.dtheta();
    }
    if (std::abs(mass - 1.0) > 1e-6) {
      throw std::invalid_argument("sample_initial: kappa exp(-Psi) integrates to " + format_real(mass) +
                                  " at site " + std::to_string(k) + ", expected 1 within 1e-6");
    }
    for (double& v : w) v /= mass;
    nu.sites.emplace_back(tg, std::move(w));
  }
  return sample_product(nu, seed);
}

EmpiricalPairMeasure kmap(const ParticleState& s) {
  EmpiricalPairMeasure e;
  const int n = s.size();
  if (n < 1) throw std::invalid_argument("kmap: no particles");
  e.mass = 1.0 / n;
  for (int k = 0; k < n; ++k) {
    e.x.push_back(static_cast<double>(k) / n);
    e.theta.push_back(s.thetas[static_cast<std::size_t>(k)]);
  }
  return e;
}

FiberedDiscreteMeasure lmap(const ParticleState& s) {
  const int n = s.size();
  if (n < 1) throw std::invalid_argument("lmap: no particles");
  FiberedDiscreteMeasure m{TorusGrid(n), {}};
  m.fibers.reserve(static_cast<std::size_t>(n));
  for (double t : s.thetas) m.fibers.push_back(DiscreteFiber::dirac(t));
  return m;
}

double k_vs_l_distance(const ParticleState& s) {
  const int n = s.size();
  if (n < 1) throw std::invalid_argument("k_vs_l_distance: no particles");
  // int_0^{1/N} d_T(0, y)^2 dy per interval; theta is not moved.
  const double w = 1.0 / n;
  const double per_interval = w <= 0.5 ? w * w * w / 3.0 : 1.0 / 12.0;
  double cost = 0.0;
  for (int k = 0; k < n; ++k) cost += per_interval;
  return std::sqrt(cost);
}

ProductMeasure recovery_sequence(const GridMeasure& mu, int n) {
  if (n < 1 || mu.n_x() % n != 0) {
    throw std::invalid_argument("recovery_sequence: N = " + std::to_string(n) + " must divide n_x = " +
                                std::to_string(mu.n_x()));
  }
  const int r = mu.n_x() / n;
  const int nt = mu.n_theta();
  ProductMeasure nu;
  nu.sites.reserve(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    std::vector<double> w(static_cast<std::size_t>(nt), 0.0);
    for (int i = k * r; i < (k + 1) * r; ++i) {
      auto row = mu.row(i);
      for (int j = 0; j < nt; ++j) w[static_cast<std::size_t>(j)] += row[static_cast<std::size_t>(j)];
    }
    for (double& v : w) v /= r;
    nu.sites.emplace_back(mu.grid().theta, std::move(w), kDynamicsTolerance);
  }
  return nu;
}

GridMeasure coarsen(const GridMeasure& mu, int n) {
  const auto nu = recovery_sequence(mu, n);
  const int r = mu.n_x() / n;
  std::vector<double> rho;
  rho.reserve(mu.grid().size());
  for (int i = 0; i < mu.n_x(); ++i) {
    const auto w = nu.sites[static_cast<std::size_t>(i / r)].weights();
    rho.insert(rho.end(), w.begin(), w.end());
  }
  return GridMeasure(mu.grid(), std::move(rho), kDynamicsTolerance);
}

GridMeasure empirical_to_grid(const std::vector<ParticleState>& samples, const Grid& grid) {
  if (samples.empty()) throw std::invalid_argument("empirical_to_grid: no samples");
  std::vector<double> counts(grid.size(), 0.0);
  const auto nt = static_cast<std::size_t>(grid.n_theta());
  for (const auto& s : samples) {
    const int n = s.size();
    for (int k = 0; k < n; ++k) {
      const auto site = static_cast<std::size_t>((static_cast<long long>(k) * grid.n_x()) / n);
      const auto cell = static_cast<std::size_t>(grid.theta.cell_of(s.thetas[static_cast<std::size_t>(k)]));
      counts[site * nt + cell] += 1.0;
    }
  }
  for (int i = 0; i < grid.n_x(); ++i) {
    double c = 0.0;
    for (std::size_t j = 0; j < nt; ++j) c += counts[static_cast<std::size_t>(i) * nt + j];
    if (c == 0.0) {
      throw std::invalid_argument("empirical_to_grid: fiber " + std::to_string(i) +
                                  " received no samples; use more particles or samples");
    }
  }
  return normalize_fibers(grid, std::move(counts));
}

}  // namespace fibered
