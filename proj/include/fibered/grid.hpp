#pragma once

#include <cstddef>

namespace fibered {

/// Equispaced sites x_i = i / n_x on the unit torus.
struct TorusGrid {
  int n_x = 1;

  TorusGrid() = default;
  explicit TorusGrid(int n);

  double dx() const { return 1.0 / n_x; }
  double site(int i) const { return static_cast<double>(i) / n_x; }
  int wrap(int i) const {
    const int r = i % n_x;
    return r < 0 ? r + n_x : r;
  }

  bool operator==(const TorusGrid&) const = default;
};

/// Truncated spin interval [theta_min, theta_max] split into n_theta cells.
/// Densities live at cell centers and are piecewise constant per cell.
struct ThetaGrid {
  double theta_min = -6.0;
  double theta_max = 6.0;
  int n_theta = 2;

  ThetaGrid() = default;
  ThetaGrid(double lo, double hi, int n);

  double dtheta() const { return (theta_max - theta_min) / n_theta; }
  double center(int j) const { return theta_min + (j + 0.5) * dtheta(); }
  double edge(int j) const { return theta_min + j * dtheta(); }
  double length() const { return theta_max - theta_min; }

  /// Index of the cell containing theta, clamped into [0, n_theta).
  int cell_of(double theta) const;

  bool operator==(const ThetaGrid&) const = default;
};

struct Grid {
  TorusGrid torus;
  ThetaGrid theta;

  int n_x() const { return torus.n_x; }
  int n_theta() const { return theta.n_theta; }
  std::size_t size() const {
    return static_cast<std::size_t>(torus.n_x) * static_cast<std::size_t>(theta.n_theta);
  }
  double cell_area() const { return torus.dx() * theta.dtheta(); }

  bool operator==(const Grid&) const = default;
};

}  // namespace fibered
