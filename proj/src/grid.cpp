#include "fibered/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace fibered {

TorusGrid::TorusGrid(int n) : n_x(n) {
  if (n < 1) throw std::invalid_argument("TorusGrid: n_x must be >= 1, got " + std::to_string(n));
}

ThetaGrid::ThetaGrid(double lo, double hi, int n) : theta_min(lo), theta_max(hi), n_theta(n) {
  if (!(lo < hi)) throw std::invalid_argument("ThetaGrid: theta_min must be < theta_max");
  if (n < 2) throw std::invalid_argument("ThetaGrid: n_theta must be >= 2, got " + std::to_string(n));
}

int ThetaGrid::cell_of(double theta) const {
  const int j = static_cast<int>(std::floor((theta - theta_min) / dtheta()));
  return std::clamp(j, 0, n_theta - 1);
}

}  // namespace fibered
