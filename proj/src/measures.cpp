#include "fibered/measures.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fibered {

namespace {

void check_density_row(std::span<const double> row, double dtheta, double tol, const char* what,
                       int index) {
  double mass = 0.0;
  for (double v : row) {
    if (!std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument(std::string(what) + ": negative or non-finite density in fiber " +
                                  std::to_string(index));
    }
    mass += v;
  }
  mass *= dtheta;
  if (std::abs(mass - 1.0) > tol) {
    throw std::invalid_argument(std::string(what) + ": fiber " + std::to_string(index) +
                                " has mass " + std::to_string(mass) + ", expected 1");
  }
}

}  // namespace

FiberMeasure::FiberMeasure(ThetaGrid grid, std::vector<double> weights, double tol)
    : grid_(grid), weights_(std::move(weights)) {
  if (weights_.size() != static_cast<std::size_t>(grid_.n_theta)) {
    throw std::invalid_argument("FiberMeasure: weight count does not match n_theta");
  }
  check_density_row(weights_, grid_.dtheta(), tol, "FiberMeasure", 0);
}

double FiberMeasure::mean() const {
  double s = 0.0;
  for (int j = 0; j < grid_.n_theta; ++j) s += grid_.center(j) * weight(j);
  return s * grid_.dtheta();
}

double FiberMeasure::second_moment() const {
  double s = 0.0;
  for (int j = 0; j < grid_.n_theta; ++j) {
    const double t = grid_.center(j);
    s += t * t * weight(j);
  }
  return s * grid_.dtheta();
}

DiscreteFiber::DiscreteFiber(std::vector<Atom> atoms) {
  if (atoms.empty()) throw std::invalid_argument("DiscreteFiber: no atoms");
  double total = 0.0;
  for (const auto& a : atoms) {
    if (!std::isfinite(a.location)) throw std::invalid_argument("DiscreteFiber: non-finite location");
    if (!(a.mass > 0.0)) throw std::invalid_argument("DiscreteFiber: atom masses must be positive");
    total += a.mass;
  }
  // Summation error grows with the atom count.
  if (std::abs(total - 1.0) > 1e-12 * std::max<double>(1.0, static_cast<double>(atoms.size()))) {
    throw std::invalid_argument("DiscreteFiber: masses sum to " + std::to_string(total));
  }
  std::sort(atoms.begin(), atoms.end(),
            [](const Atom& a, const Atom& b) { return a.location < b.location; });
  for (const auto& a : atoms) {
    if (!atoms_.empty() && atoms_.back().location == a.location) {
      atoms_.back().mass += a.mass;
    } else {
      atoms_.push_back(a);
    }
  }
}

DiscreteFiber DiscreteFiber::uniform(std::span<const double> locations) {
  if (locations.empty()) throw std::invalid_argument("DiscreteFiber::uniform: no locations");
  std::vector<Atom> atoms;
  atoms.reserve(locations.size());
  const double w = 1.0 / static_cast<double>(locations.size());
  for (double x : locations) atoms.push_back({x, w});
  // Round-off in n * (1/n) is far below the 1e-12 check.
  return DiscreteFiber(std::move(atoms));
}

double DiscreteFiber::mean() const {
  double s = 0.0;
  for (const auto& a : atoms_) s += a.location * a.mass;
  return s;
}

GridMeasure::GridMeasure(Grid grid, std::vector<double> rho, double tol)
    : grid_(grid), rho_(std::move(rho)) {
  if (rho_.size() != grid_.size()) {
    throw std::invalid_argument("GridMeasure: density size does not match grid");
  }
  for (int i = 0; i < grid_.n_x(); ++i) {
    check_density_row(row(i), grid_.theta.dtheta(), tol, "GridMeasure", i);
  }
}

GridMeasure GridMeasure::from_fiber(TorusGrid torus, const FiberMeasure& f) {
  Grid grid{torus, f.grid()};
  std::vector<double> rho;
  rho.reserve(grid.size());
  for (int i = 0; i < torus.n_x; ++i) rho.insert(rho.end(), f.weights().begin(), f.weights().end());
  return GridMeasure(grid, std::move(rho));
}

std::span<const double> GridMeasure::row(int i) const {
  const auto n = static_cast<std::size_t>(grid_.n_theta());
  return std::span<const double>(rho_).subspan(static_cast<std::size_t>(i) * n, n);
}

FiberMeasure GridMeasure::fiber(int i) const {
  if (i < 0 || i >= grid_.n_x()) {
    throw std::out_of_range("GridMeasure::fiber: site index " + std::to_string(i) +
                            " outside [0, " + std::to_string(grid_.n_x()) + ")");
  }
  auto r = row(i);
  // Stored rows already passed validation; skip the mass check so the copy is exact.
  return FiberMeasure(grid_.theta, std::vector<double>(r.begin(), r.end()), 1.0);
}

GridMeasure GridMeasure::with_fiber(int i, const FiberMeasure& f) const {
  if (i < 0 || i >= grid_.n_x()) {
    throw std::out_of_range("GridMeasure::with_fiber: site index out of range");
  }
  if (!(f.grid() == grid_.theta)) {
    throw std::invalid_argument("GridMeasure::with_fiber: theta grid mismatch");
  }
  GridMeasure out = *this;
  std::copy(f.weights().begin(), f.weights().end(),
            out.rho_.begin() + static_cast<std::ptrdiff_t>(i) * grid_.n_theta());
  return out;
}

double GridMeasure::fiber_mass(int i) const {
  double s = 0.0;
  for (double v : row(i)) s += v;
  return s * grid_.theta.dtheta();
}

double GridMeasure::fiber_mean(int i) const {
  auto r = row(i);
  double s = 0.0;
  for (int j = 0; j < grid_.n_theta(); ++j) s += grid_.theta.center(j) * r[static_cast<std::size_t>(j)];
  return s * grid_.theta.dtheta();
}

double GridMeasure::total_mass() const {
  double s = 0.0;
  for (int i = 0; i < grid_.n_x(); ++i) s += fiber_mass(i);
  return s * grid_.torus.dx();
}

double GridMeasure::fiber_mass_error() const {
  double e = 0.0;
  for (int i = 0; i < grid_.n_x(); ++i) e = std::max(e, std::abs(fiber_mass(i) - 1.0));
  return e;
}

double GridMeasure::min_density() const { return *std::min_element(rho_.begin(), rho_.end()); }

GridMeasure normalize_fibers(const Grid& grid, std::vector<double> raw) {
  if (raw.size() != grid.size()) throw std::invalid_argument("normalize_fibers: size mismatch");
  const auto n = static_cast<std::size_t>(grid.n_theta());
  for (int i = 0; i < grid.n_x(); ++i) {
    auto first = raw.begin() + static_cast<std::ptrdiff_t>(static_cast<std::size_t>(i) * n);
    double mass = 0.0;
    for (auto it = first; it != first + static_cast<std::ptrdiff_t>(n); ++it) {
      if (!std::isfinite(*it) || *it < 0.0) {
        throw std::invalid_argument("normalize_fibers: negative or non-finite entry in fiber " +
                                    std::to_string(i));
      }
      mass += *it;
    }
    mass *= grid.theta.dtheta();
    if (!(mass > 0.0)) {
      throw std::invalid_argument("normalize_fibers: fiber " + std::to_string(i) + " has zero mass");
    }
    for (auto it = first; it != first + static_cast<std::ptrdiff_t>(n); ++it) *it /= mass;
  }
  return GridMeasure(grid, std::move(raw));
}

double second_moment(const GridMeasure& mu) {
  const auto& g = mu.grid();
  double s = 0.0;
  for (int i = 0; i < g.n_x(); ++i) {
    auto r = mu.row(i);
    double fs = 0.0;
    for (int j = 0; j < g.n_theta(); ++j) {
      const double t = g.theta.center(j);
      fs += t * t * r[static_cast<std::size_t>(j)];
    }
    s += fs;
  }
  return s * g.cell_area();
}

}  // namespace fibered
