#include "fibered/functionals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fibered {

MagnetizationField magnetization_from_means(std::span<const double> means, const Kernel& j) {
  const int n = static_cast<int>(means.size());
  const auto table = j.circulant_table(n);
  const double dx = 1.0 / n;
  MagnetizationField m;
  m.values.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      s += table[static_cast<std::size_t>(((i - k) % n + n) % n)] * means[static_cast<std::size_t>(k)];
    }
    m.values[static_cast<std::size_t>(i)] = s * dx;
  }
  return m;
}

namespace {

std::vector<double> fiber_means(const GridMeasure& mu) {
  std::vector<double> means(static_cast<std::size_t>(mu.n_x()));
  for (int i = 0; i < mu.n_x(); ++i) means[static_cast<std::size_t>(i)] = mu.fiber_mean(i);
  return means;
}

}  // namespace

MagnetizationField magnetization(const GridMeasure& mu, const ModelParams& p) {
  return magnetization_from_means(fiber_means(mu), p.kernel());
}

double entropy(const GridMeasure& mu) {
  double s = 0.0;
  for (double r : mu.data()) {
    if (r > 0.0) s += r * std::log(r);
  }
  return s * mu.grid().cell_area();
}

double potential_energy(const GridMeasure& mu, const ModelParams& p) {
  const auto& g = mu.grid();
  std::vector<double> psi(static_cast<std::size_t>(g.n_theta()));
  for (int j = 0; j < g.n_theta(); ++j) psi[static_cast<std::size_t>(j)] = p.psi()(g.theta.center(j));
  double s = 0.0;
  for (int i = 0; i < g.n_x(); ++i) {
    auto r = mu.row(i);
    for (int j = 0; j < g.n_theta(); ++j) s += psi[static_cast<std::size_t>(j)] * r[static_cast<std::size_t>(j)];
  }
  return s * g.cell_area();
}

double interaction_energy(const GridMeasure& mu, const ModelParams& p) {
  const auto means = fiber_means(mu);
  const auto m = magnetization_from_means(means, p.kernel());
  double s = 0.0;
  for (std::size_t i = 0; i < means.size(); ++i) s += means[i] * m.values[i];
  return -0.5 * s * mu.grid().torus.dx();
}

FreeEnergyParts free_energy_parts(const GridMeasure& mu, const ModelParams& p) {
  FreeEnergyParts f;
  f.entropy = entropy(mu);
  f.potential = potential_energy(mu, p);
  f.interaction = interaction_energy(mu, p);
  f.total = f.entropy + f.potential + f.interaction;
  return f;
}

double free_energy(const GridMeasure& mu, const ModelParams& p) { return free_energy_parts(mu, p).total; }

double relative_entropy(const GridMeasure& mu, std::span<const double> ref) {
  const auto rho = mu.data();
  if (ref.size() != rho.size()) throw std::invalid_argument("relative_entropy: reference size mismatch");
  double s = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (rho[k] <= 0.0) continue;
    if (!(ref[k] > 0.0)) return kInfiniteEntropy;
    s += rho[k] * std::log(rho[k] / ref[k]);
  }
  return s * mu.grid().cell_area();
}

double relative_entropy(const GridMeasure& mu, const GridMeasure& ref) {
  if (!(mu.grid() == ref.grid())) throw std::invalid_argument("relative_entropy: grid mismatch");
  return relative_entropy(mu, ref.data());
}

std::vector<double> theta_derivative(std::span<const double> f, double h) {
  const std::size_t n = f.size();
  if (n < 3) throw std::invalid_argument("theta_derivative: need at least 3 cells");
  std::vector<double> d(n);
  d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  for (std::size_t j = 1; j + 1 < n; ++j) d[j] = (f[j + 1] - f[j - 1]) / (2.0 * h);
  d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return d;
}

SlopeField slope_field(const GridMeasure& mu, const ModelParams& p) {
  const auto& g = mu.grid();
  const double h = g.theta.dtheta();
  const auto m = magnetization(mu, p);
  SlopeField out{g, std::vector<double>(g.size(), 0.0), std::vector<char>(g.size(), 0), 0.0};
  for (int i = 0; i < g.n_x(); ++i) {
    auto r = mu.row(i);
    const auto d = theta_derivative(r, h);
    for (int j = 0; j < g.n_theta(); ++j) {
      const auto k = static_cast<std::size_t>(i) * static_cast<std::size_t>(g.n_theta()) + static_cast<std::size_t>(j);
      const double rho = r[static_cast<std::size_t>(j)];
      if (rho < kDensityMask) {
        out.mask[k] = 1;
        out.masked_mass += rho;
        continue;
      }
      out.w[k] = d[static_cast<std::size_t>(j)] / rho + p.psi().derivative(g.theta.center(j)) - m[i];
    }
  }
  out.masked_mass *= g.cell_area();
  return out;
}

double metric_slope(const GridMeasure& mu, const SlopeField& w) {
  const auto rho = mu.data();
  double s = 0.0;
  for (std::size_t k = 0; k < rho.size(); ++k) {
    if (!w.mask[k]) s += w.w[k] * w.w[k] * rho[k];
  }
  return std::sqrt(s * mu.grid().cell_area());
}

double metric_slope(const GridMeasure& mu, const ModelParams& p) { return metric_slope(mu, slope_field(mu, p)); }

double variational_slope(const GridMeasure& mu, const ModelParams& p, const std::vector<TestField>& family) {
  if (family.empty()) throw std::invalid_argument("variational_slope: empty test family");
  const auto& g = mu.grid();
  const double h = g.theta.dtheta();
  const auto m = magnetization(mu, p);
  // Discrete "rho (Psi' - m) - d_theta^* rho" integrand per cell, unmasked cells only.
  std::vector<double> flux(g.size(), 0.0);
  for (int i = 0; i < g.n_x(); ++i) {
    auto r = mu.row(i);
    const auto d = theta_derivative(r, h);
    for (int j = 0; j < g.n_theta(); ++j) {
      const auto k = static_cast<std::size_t>(i) * static_cast<std::size_t>(g.n_theta()) + static_cast<std::size_t>(j);
      const double rho = r[static_cast<std::size_t>(j)];
      if (rho < kDensityMask) continue;
      flux[k] = d[static_cast<std::size_t>(j)] + rho * (p.psi().derivative(g.theta.center(j)) - m[i]);
    }
  }
  const auto rho = mu.data();
  double best = -1.0;
  for (const auto& beta : family) {
    if (beta.size() != g.size()) throw std::invalid_argument("variational_slope: test field size mismatch");
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) {
      num += beta[k] * flux[k];
      den += beta[k] * beta[k] * rho[k];
    }
    if (!(den > 0.0)) continue;
    best = std::max(best, std::abs(num) * std::sqrt(g.cell_area()) / std::sqrt(den));
  }
  if (best < 0.0) throw std::invalid_argument("variational_slope: every test field has zero L2(mu) norm");
  return best;
}

std::vector<TestField> hermite_fourier_family(const Grid& grid, int count) {
  auto hermite = [](int a, double t) {
    double h0 = 1.0, h1 = t;
    if (a == 0) return h0;
    for (int k = 1; k < a; ++k) {
      const double h2 = t * h1 - k * h0;
      h0 = h1;
      h1 = h2;
    }
    return h1;
  };
  std::vector<TestField> out;
  for (int s = 0; static_cast<int>(out.size()) < count; ++s) {
    for (int b = 0; b <= s && static_cast<int>(out.size()) < count; ++b) {
      const int a = s - b;
      const int variants = b == 0 ? 1 : 2;
      for (int v = 0; v < variants && static_cast<int>(out.size()) < count; ++v) {
        TestField f(grid.size());
        for (int i = 0; i < grid.n_x(); ++i) {
          const double phase = 2.0 * std::numbers::pi * b * grid.torus.site(i);
          const double fx = b == 0 ? 1.0 : (v == 0 ? std::cos(phase) : std::sin(phase));
          for (int j = 0; j < grid.n_theta(); ++j) {
            f[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid.n_theta()) + static_cast<std::size_t>(j)] =
                fx * hermite(a, grid.theta.center(j));
          }
        }
        out.push_back(std::move(f));
      }
    }
  }
  return out;
}

GridMeasure gibbs_measure(const Grid& grid, const ModelParams& p) {
  std::vector<double> psi(static_cast<std::size_t>(grid.n_theta()));
  for (int j = 0; j < grid.n_theta(); ++j) psi[static_cast<std::size_t>(j)] = p.psi()(grid.theta.center(j));
  const double lo = *std::min_element(psi.begin(), psi.end());
  std::vector<double> raw;
  raw.reserve(grid.size());
  for (int i = 0; i < grid.n_x(); ++i) {
    for (double v : psi) raw.push_back(std::exp(-(v - lo)));
  }
  return normalize_fibers(grid, std::move(raw));
}

}  // namespace fibered
