#pragma once

#include <span>
#include <vector>

namespace fibered {

struct TransportSolution {
  double cost = 0.0;
  /// Row-major supply x demand plan.
  std::vector<double> plan;
  int pivots = 0;
};

/// Exact discrete Monge-Kantorovich problem
///   min sum_ij c_ij g_ij  s.t.  sum_j g_ij = supply_i, sum_i g_ij = demand_j, g >= 0
/// by the transportation simplex (north-west-corner start, u-v potentials,
/// cycle pivots on the basis tree). `cost` is row-major supply x demand.
TransportSolution solve_transport(std::span<const double> supply, std::span<const double> demand,
                                  std::span<const double> cost);

}  // namespace fibered
