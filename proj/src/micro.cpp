#include "fibered/micro.hpp"

#include <cmath>
#include <stdexcept>

#include "fibered/functionals.hpp"

namespace fibered {

namespace {

// sum_j J((i-j)/N) theta^j for every i.
std::vector<double> coupling(const std::vector<double>& t, const Kernel& j) {
  const int n = static_cast<int>(t.size());
  const auto table = j.circulant_table(n);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) s += table[static_cast<std::size_t>(((i - k) % n + n) % n)] * t[static_cast<std::size_t>(k)];
    out[static_cast<std::size_t>(i)] = s;
  }
  return out;
}

double quadratic_part(const ParticleState& s, const ModelParams& p) {
  const auto c = coupling(s.thetas, p.kernel());
  double q = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) q += s.thetas[i] * c[i];
  return q / (2.0 * s.size());
}

double psi_sum(const ParticleState& s, const ModelParams& p) {
  double v = 0.0;
  for (double t : s.thetas) v += p.psi()(t);
  return v;
}

void require_nonempty(const ParticleState& s) {
  if (s.thetas.empty()) throw std::invalid_argument("hamiltonian: N must be >= 1");
}

void require_product(const ProductMeasure& nu, const char* what) {
  if (nu.sites.empty()) throw std::invalid_argument(std::string(what) + ": empty product measure");
  for (const auto& f : nu.sites) {
    if (!(f.grid() == nu.sites.front().grid())) {
      throw std::invalid_argument(std::string(what) + ": site fibers must share one theta grid");
    }
  }
}

}  // namespace

double hamiltonian(const ParticleState& s, const ModelParams& p) {
  require_nonempty(s);
  return psi_sum(s, p) + quadratic_part(s, p);
}

std::vector<double> hamiltonian_gradient(const ParticleState& s, const ModelParams& p) {
  require_nonempty(s);
  const auto c = coupling(s.thetas, p.kernel());
  std::vector<double> g(s.thetas.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = p.psi().derivative(s.thetas[i]) + c[i] / s.size();
  return g;
}

double drift_energy(const ParticleState& s, const ModelParams& p) {
  require_nonempty(s);
  return psi_sum(s, p) - quadratic_part(s, p);
}

std::vector<double> drift(const ParticleState& s, const ModelParams& p) {
  require_nonempty(s);
  const auto c = coupling(s.thetas, p.kernel());
  std::vector<double> b(s.thetas.size());
  for (std::size_t i = 0; i < b.size(); ++i) b[i] = -p.psi().derivative(s.thetas[i]) + c[i] / s.size();
  return b;
}

double micro_free_energy(const ProductMeasure& nu, const ModelParams& p) {
  require_product(nu, "micro_free_energy");
  const int n = nu.size();
  const auto& tg = nu.sites.front().grid();
  const double h = tg.dtheta();
  std::vector<double> mean(static_cast<std::size_t>(n)), second(static_cast<std::size_t>(n));
  double local = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto& f = nu.sites[static_cast<std::size_t>(k)];
    double s = 0.0;
    for (int j = 0; j < tg.n_theta; ++j) {
      const double r = f.weight(j);
      if (r > 0.0) s += r * std::log(r);
      s += r * p.psi()(tg.center(j));
    }
    local += s * h;
    mean[static_cast<std::size_t>(k)] = f.mean();
    second[static_cast<std::size_t>(k)] = f.second_moment();
  }
  const auto c = coupling(mean, p.kernel());
  const double j0 = p.kernel()(0.0);
  double pair = 0.0;
  for (int k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    // Off-diagonal pairs factor into means; the diagonal needs the second moment.
    pair += mean[kk] * c[kk] + j0 * (second[kk] - mean[kk] * mean[kk]);
  }
  return (local - pair / (2.0 * n)) / n;
}

double micro_slope(const ProductMeasure& nu, const ModelParams& p) {
  require_product(nu, "micro_slope");
  const int n = nu.size();
  const auto& tg = nu.sites.front().grid();
  const double h = tg.dtheta();
  const auto table = p.kernel().circulant_table(n);
  std::vector<double> mean(static_cast<std::size_t>(n)), var(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    const auto& f = nu.sites[static_cast<std::size_t>(k)];
    mean[static_cast<std::size_t>(k)] = f.mean();
    var[static_cast<std::size_t>(k)] = f.second_moment() - f.mean() * f.mean();
  }
  const double j0 = table[0];
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    // S = (1/N) sum_{j != k} J theta^j is independent of theta^k.
    double es = 0.0, vs = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == k) continue;
      const double jj = table[static_cast<std::size_t>(((k - j) % n + n) % n)];
      es += jj * mean[static_cast<std::size_t>(j)];
      vs += jj * jj * var[static_cast<std::size_t>(j)];
    }
    es /= n;
    vs /= static_cast<double>(n) * n;
    const auto& f = nu.sites[static_cast<std::size_t>(k)];
    const auto d = theta_derivative(f.weights(), h);
    double e = 0.0;
    for (int j = 0; j < tg.n_theta; ++j) {
      const double r = f.weight(j);
      if (r < kDensityMask) continue;
      const double t = tg.center(j);
      const double g = d[static_cast<std::size_t>(j)] / r + p.psi().derivative(t) - j0 * t / n - es;
      e += g * g * r;
    }
    total += e * h + vs;
  }
  return total / n;
}

ProductMeasure product_of_fibers(const GridMeasure& mu) {
  ProductMeasure nu;
  nu.sites.reserve(static_cast<std::size_t>(mu.n_x()));
  for (int i = 0; i < mu.n_x(); ++i) nu.sites.push_back(mu.fiber(i));
  return nu;
}

GridMeasure grid_of_product(const ProductMeasure& nu) {
  if (nu.sites.empty()) throw std::invalid_argument("grid_of_product: empty product measure");
  Grid grid{TorusGrid(nu.size()), nu.sites.front().grid()};
  std::vector<double> rho;
  rho.reserve(grid.size());
  for (const auto& f : nu.sites) rho.insert(rho.end(), f.weights().begin(), f.weights().end());
  return GridMeasure(grid, std::move(rho), kDynamicsTolerance);
}

}  // namespace fibered
