#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "fibered/measures.hpp"
#include "fibered/model.hpp"

namespace testing {

using namespace fibered;

inline ModelParams quadratic_model(double theta_min = -6.0, double theta_max = 6.0) {
  return ModelParams(Polynomial({0.0, 0.0, 0.5}), Kernel::constant(0.0), GrowthConstants{0.0, 0.5, 0.0, 1},
                     theta_min, theta_max);
}

inline ModelParams double_well(Kernel j = Kernel::constant(0.0)) {
  return ModelParams::default_model().with_kernel(std::move(j));
}

/// Truncated normal fibers N(mean_i, var) with mean_i = mean(x_i).
template <class F>
GridMeasure normal_fibers(const Grid& g, F mean, double var) {
  std::vector<double> raw;
  for (int i = 0; i < g.n_x(); ++i) {
    const double m = mean(g.torus.site(i));
    for (int j = 0; j < g.n_theta(); ++j) {
      const double t = g.theta.center(j) - m;
      raw.push_back(std::exp(-0.5 * t * t / var));
    }
  }
  return normalize_fibers(g, std::move(raw));
}

inline GridMeasure normal_fibers(const Grid& g, double mean, double var) {
  return normal_fibers(g, [mean](double) { return mean; }, var);
}

/// Every fiber puts all its mass in the cell containing theta.
inline GridMeasure point_fibers(const Grid& g, double theta) {
  std::vector<double> raw(g.size(), 0.0);
  const int j = g.theta.cell_of(theta);
  for (int i = 0; i < g.n_x(); ++i) raw[static_cast<std::size_t>(i * g.n_theta() + j)] = 1.0;
  return normalize_fibers(g, std::move(raw));
}

}  // namespace testing
