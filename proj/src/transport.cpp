#include "fibered/transport.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "fibered/lp.hpp"

namespace fibered {

namespace {

double lerp_at(const QuantileSegment& s, double u) {
  const double len = s.u1 - s.u0;
  if (len <= 0.0) return s.q0;
  return s.q0 + (s.q1 - s.q0) * ((u - s.u0) / len);
}

double torus_distance(double a, double b) {
  const double d = std::abs(a - b);
  const double r = d - std::floor(d);
  return std::min(r, 1.0 - r);
}

void require_same_grid(const GridMeasure& mu, const GridMeasure& nu, const char* what) {
  if (!(mu.grid() == nu.grid())) throw std::invalid_argument(std::string(what) + ": grid mismatch");
}

}  // namespace

double w2_lp_oracle(const DiscreteFiber& a, const DiscreteFiber& b) {
  if (a.size() > kLpOracleMaxAtoms || b.size() > kLpOracleMaxAtoms) {
    throw std::invalid_argument("w2_lp_oracle: at most " + std::to_string(kLpOracleMaxAtoms) +
                                " atoms per measure");
  }
  std::vector<double> supply, demand, cost;
  for (const auto& x : a.atoms()) supply.push_back(x.mass);
  for (const auto& y : b.atoms()) demand.push_back(y.mass);
  for (const auto& x : a.atoms()) {
    for (const auto& y : b.atoms()) cost.push_back((x.location - y.location) * (x.location - y.location));
  }
  const auto sol = solve_transport(supply, demand, cost);
  return std::sqrt(std::max(0.0, sol.cost));
}

double wl_distance(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu, nu, "wl_distance");
  double acc = 0.0;
  for (int i = 0; i < mu.n_x(); ++i) {
    acc += w2_squared(QuantileFunction::of(mu.fiber(i)), QuantileFunction::of(nu.fiber(i)));
  }
  return std::sqrt(acc * mu.grid().torus.dx());
}

double wl_distance(const FiberedDiscreteMeasure& mu, const FiberedDiscreteMeasure& nu) {
  if (!(mu.torus == nu.torus) || mu.fibers.size() != static_cast<std::size_t>(mu.torus.n_x) ||
      nu.fibers.size() != mu.fibers.size()) {
    throw std::invalid_argument("wl_distance: torus grid mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < mu.fibers.size(); ++i) {
    acc += w2_squared(QuantileFunction::of(mu.fibers[i]), QuantileFunction::of(nu.fibers[i]));
  }
  return std::sqrt(acc * mu.torus.dx());
}

double wl_distance(const GridMeasure& mu, const FiberedDiscreteMeasure& nu) {
  if (!(mu.grid().torus == nu.torus) || nu.fibers.size() != static_cast<std::size_t>(mu.n_x())) {
    throw std::invalid_argument("wl_distance: torus grid mismatch");
  }
  double acc = 0.0;
  for (int i = 0; i < mu.n_x(); ++i) {
    acc += w2_squared(QuantileFunction::of(mu.fiber(i)),
                      QuantileFunction::of(nu.fibers[static_cast<std::size_t>(i)]));
  }
  return std::sqrt(acc * mu.grid().torus.dx());
}

double w2_flattened(const FiberedDiscreteMeasure& mu, const FiberedDiscreteMeasure& nu) {
  struct Point {
    double x, theta, mass;
  };
  auto flatten = [](const FiberedDiscreteMeasure& m) {
    if (m.fibers.size() != static_cast<std::size_t>(m.torus.n_x)) {
      throw std::invalid_argument("w2_flattened: fiber count does not match torus grid");
    }
    std::vector<Point> pts;
    for (int i = 0; i < m.torus.n_x; ++i) {
      for (const auto& a : m.fibers[static_cast<std::size_t>(i)].atoms()) {
        pts.push_back({m.torus.site(i), a.location, a.mass * m.torus.dx()});
      }
    }
    return pts;
  };
  const auto p = flatten(mu);
  const auto q = flatten(nu);
  std::vector<double> supply, demand, cost;
  for (const auto& a : p) supply.push_back(a.mass);
  for (const auto& b : q) demand.push_back(b.mass);
  cost.reserve(p.size() * q.size());
  for (const auto& a : p) {
    for (const auto& b : q) {
      const double dx = torus_distance(a.x, b.x);
      cost.push_back(dx * dx + (a.theta - b.theta) * (a.theta - b.theta));
    }
  }
  return std::sqrt(std::max(0.0, solve_transport(supply, demand, cost).cost));
}

FiberedDiscreteMeasure to_discrete(const GridMeasure& mu) {
  FiberedDiscreteMeasure out{mu.grid().torus, {}};
  const auto& tg = mu.grid().theta;
  for (int i = 0; i < mu.n_x(); ++i) {
    auto r = mu.row(i);
    double total = 0.0;
    for (double v : r) total += v;
    std::vector<Atom> atoms;
    for (int j = 0; j < tg.n_theta; ++j) {
      const double v = r[static_cast<std::size_t>(j)];
      if (v > 0.0) atoms.push_back({tg.center(j), v / total});
    }
    out.fibers.emplace_back(std::move(atoms));
  }
  return out;
}

FiberMap::FiberMap(ThetaGrid grid, std::vector<MapPiece> pieces)
    : grid_(grid), pieces_(std::move(pieces)) {
  if (pieces_.empty()) throw std::invalid_argument("FiberMap: no pieces");
}

double FiberMap::operator()(double theta) const {
  auto it = std::upper_bound(pieces_.begin(), pieces_.end(), theta,
                             [](double t, const MapPiece& p) { return t < p.theta0; });
  if (it == pieces_.begin()) return pieces_.front().value0;
  const auto& p = *(it - 1);
  if (theta >= p.theta1) return p.value1;
  const double len = p.theta1 - p.theta0;
  if (len <= 0.0) return p.value0;
  return p.value0 + (p.value1 - p.value0) * ((theta - p.theta0) / len);
}

std::vector<double> FiberMap::values_at_centers() const {
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(grid_.n_theta));
  for (int j = 0; j < grid_.n_theta; ++j) out.push_back((*this)(grid_.center(j)));
  return out;
}

bool FiberMap::is_monotone() const {
  for (std::size_t k = 0; k < pieces_.size(); ++k) {
    const auto& p = pieces_[k];
    if (p.value1 < p.value0) return false;
    if (k > 0 && p.value0 < pieces_[k - 1].value1 - 1e-12 * (1.0 + std::abs(p.value0))) return false;
  }
  return true;
}

double FiberMap::displacement_norm_squared() const {
  double acc = 0.0;
  for (const auto& p : pieces_) {
    const double d0 = p.theta0 - p.value0;
    const double d1 = p.theta1 - p.value1;
    acc += p.density * (p.theta1 - p.theta0) * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
  }
  return acc;
}

FiberMap fiber_optimal_map(const FiberMeasure& from, const FiberMeasure& to) {
  const auto w = from.weights();
  if (*std::max_element(w.begin(), w.end()) <= kAcThreshold) {
    throw std::invalid_argument("l_optimal_map: source fiber is not absolutely continuous");
  }
  const auto qa = QuantileFunction::of(from);
  const auto qb = QuantileFunction::of(to);
  auto sa = qa.segments();
  auto sb = qb.segments();
  std::vector<MapPiece> pieces;
  std::size_t ia = 0, ib = 0;
  double u = 0.0;
  while (ia < sa.size() && ib < sb.size()) {
    const double end = std::min(sa[ia].u1, sb[ib].u1);
    if (end > u) {
      const auto& s = sa[ia];
      const double density = (s.u1 - s.u0) / (s.q1 - s.q0);
      pieces.push_back({lerp_at(s, u), lerp_at(s, end), lerp_at(sb[ib], u), lerp_at(sb[ib], end), density});
    }
    u = std::max(u, end);
    if (sa[ia].u1 <= end) ++ia;
    if (ib < sb.size() && sb[ib].u1 <= end) ++ib;
  }
  return FiberMap(from.grid(), std::move(pieces));
}

double LOptimalMap::displacement_norm() const {
  double acc = 0.0;
  for (const auto& f : fibers) acc += f.displacement_norm_squared();
  return std::sqrt(acc * torus.dx());
}

LOptimalMap l_optimal_map(const GridMeasure& mu, const GridMeasure& nu) {
  require_same_grid(mu, nu, "l_optimal_map");
  LOptimalMap out{mu.grid().torus, {}};
  out.fibers.reserve(static_cast<std::size_t>(mu.n_x()));
  for (int i = 0; i < mu.n_x(); ++i) {
    try {
      out.fibers.push_back(fiber_optimal_map(mu.fiber(i), nu.fiber(i)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(std::string(e.what()) + " (fiber " + std::to_string(i) + ")");
    }
  }
  return out;
}

std::vector<double> push_forward_masses(const FiberMap& map, double t) {
  const auto& g = map.grid();
  const double h = g.dtheta();
  std::vector<double> mass(static_cast<std::size_t>(g.n_theta), 0.0);
  for (const auto& p : map.pieces()) {
    const double m = p.density * (p.theta1 - p.theta0);
    if (m <= 0.0) continue;
    const double a = std::clamp((1.0 - t) * p.theta0 + t * p.value0, g.theta_min, g.theta_max);
    const double b = std::clamp((1.0 - t) * p.theta1 + t * p.value1, g.theta_min, g.theta_max);
    const double len = b - a;
    const int ja = g.cell_of(a);
    if (len <= 1e-15 * h) {
      mass[static_cast<std::size_t>(ja)] += m;
      continue;
    }
    const int jb = g.cell_of(b);
    for (int j = ja; j <= jb; ++j) {
      const double overlap = std::min(b, g.edge(j + 1)) - std::max(a, g.edge(j));
      if (overlap > 0.0) mass[static_cast<std::size_t>(j)] += m * (overlap / len);
    }
  }
  return mass;
}

GridMeasure geodesic(const GridMeasure& mu0, const GridMeasure& mu1, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw std::invalid_argument("geodesic: t must lie in [0, 1]");
  const auto maps = l_optimal_map(mu0, mu1);
  const auto& grid = mu0.grid();
  const double h = grid.theta.dtheta();
  std::vector<double> rho;
  rho.reserve(grid.size());
  for (const auto& f : maps.fibers) {
    for (double m : push_forward_masses(f, t)) rho.push_back(m / h);
  }
  return GridMeasure(grid, std::move(rho), kDynamicsTolerance);
}

MetricDerivative metric_derivative(const MeasureCurve& curve, std::size_t index) {
  const std::size_t n = curve.size();
  if (n < 2) throw std::invalid_argument("metric_derivative: curve needs at least two samples");
  if (index >= n) throw std::out_of_range("metric_derivative: index out of range");
  if (index == 0) {
    return {wl_distance(curve.state(0), curve.state(1)) / (curve.time(1) - curve.time(0)), true};
  }
  if (index == n - 1) {
    return {wl_distance(curve.state(n - 2), curve.state(n - 1)) /
                (curve.time(n - 1) - curve.time(n - 2)),
            true};
  }
  return {wl_distance(curve.state(index - 1), curve.state(index + 1)) /
              (curve.time(index + 1) - curve.time(index - 1)),
          false};
}

}  // namespace fibered
