#pragma once

#include <span>
#include <vector>

#include "fibered/grid.hpp"

namespace fibered {

/// Normalization slack right after construction.
inline constexpr double kConstructionTolerance = 1e-10;
/// Normalization slack for states produced by time stepping.
inline constexpr double kDynamicsTolerance = 1e-8;

/// Probability density on the truncated spin interval, piecewise constant per
/// cell. weights[j] is the density value on cell j.
class FiberMeasure {
 public:
  FiberMeasure(ThetaGrid grid, std::vector<double> weights, double tol = kConstructionTolerance);

  const ThetaGrid& grid() const { return grid_; }
  std::span<const double> weights() const { return weights_; }
  double weight(int j) const { return weights_[static_cast<std::size_t>(j)]; }
  /// Probability carried by cell j.
  double cell_mass(int j) const { return weight(j) * grid_.dtheta(); }
  double mean() const;
  double second_moment() const;

  bool operator==(const FiberMeasure&) const = default;

 private:
  ThetaGrid grid_;
  std::vector<double> weights_;
};

struct Atom {
  double location = 0.0;
  double mass = 0.0;
};

/// Finitely supported probability measure on R. Atoms are kept sorted by
/// location; duplicate locations are merged.
class DiscreteFiber {
 public:
  explicit DiscreteFiber(std::vector<Atom> atoms);

  static DiscreteFiber dirac(double location) { return DiscreteFiber({{location, 1.0}}); }
  /// Equal masses 1/n on the given locations.
  static DiscreteFiber uniform(std::span<const double> locations);

  std::span<const Atom> atoms() const { return atoms_; }
  std::size_t size() const { return atoms_.size(); }
  double mean() const;

 private:
  std::vector<Atom> atoms_;
};

/// Density on T x [theta_min, theta_max] whose every fiber is a probability
/// density, so that the torus marginal is Lebesgue measure.
class GridMeasure {
 public:
  GridMeasure(Grid grid, std::vector<double> rho, double tol = kConstructionTolerance);

  /// Same density on every fiber.
  static GridMeasure from_fiber(TorusGrid torus, const FiberMeasure& f);

  const Grid& grid() const { return grid_; }
  int n_x() const { return grid_.n_x(); }
  int n_theta() const { return grid_.n_theta(); }

  double rho(int i, int j) const {
    return rho_[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid_.n_theta()) +
                static_cast<std::size_t>(j)];
  }
  std::span<const double> data() const { return rho_; }
  std::span<const double> row(int i) const;

  /// Fiber at site i; exact copy of row i.
  FiberMeasure fiber(int i) const;
  /// Copy of this measure with fiber i replaced.
  GridMeasure with_fiber(int i, const FiberMeasure& f) const;

  double fiber_mass(int i) const;
  double fiber_mean(int i) const;
  double total_mass() const;
  /// max_i |fiber mass - 1|
  double fiber_mass_error() const;
  double min_density() const;

  bool operator==(const GridMeasure&) const = default;

 private:
  Grid grid_;
  std::vector<double> rho_;
};

/// Fibered measure whose fibers are discrete (used for the W^L counterexample
/// and the L^N empirical map).
struct FiberedDiscreteMeasure {
  TorusGrid torus;
  std::vector<DiscreteFiber> fibers;
};

/// Scales each row of a nonnegative raw grid to unit fiber mass.
GridMeasure normalize_fibers(const Grid& grid, std::vector<double> raw);

/// Midpoint quadrature of the second moment in theta.
double second_moment(const GridMeasure& mu);

}  // namespace fibered
