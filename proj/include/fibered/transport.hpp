#pragma once

#include <cmath>
#include <vector>

#include "fibered/curve.hpp"
#include "fibered/measures.hpp"
#include "fibered/quantile.hpp"

namespace fibered {

/// Quadratic Wasserstein distance between two measures on R (any mix of
/// FiberMeasure and DiscreteFiber), exact on the piecewise structure.
template <class A, class B>
double w2_fiber(const A& a, const B& b) {
  return std::sqrt(w2_squared(QuantileFunction::of(a), QuantileFunction::of(b)));
}

/// Atom count accepted by the LP oracle.
inline constexpr std::size_t kLpOracleMaxAtoms = 50;

/// W2 between discrete fibers by solving the coupling LP directly.
double w2_lp_oracle(const DiscreteFiber& a, const DiscreteFiber& b);

/// Fibered metric: sqrt( sum_i W2(mu^{x_i}, nu^{x_i})^2 dx ). Fibers are
/// summed in index order.
double wl_distance(const GridMeasure& mu, const GridMeasure& nu);
double wl_distance(const FiberedDiscreteMeasure& mu, const FiberedDiscreteMeasure& nu);
double wl_distance(const GridMeasure& mu, const FiberedDiscreteMeasure& nu);

/// Plain W2 on T x R between two fibered discrete measures, with the torus
/// distance in x. Solved as one LP over all atoms; meant for small inputs.
double w2_flattened(const FiberedDiscreteMeasure& mu, const FiberedDiscreteMeasure& nu);

/// Atoms at cell centers carrying the cell masses (zero cells dropped).
FiberedDiscreteMeasure to_discrete(const GridMeasure& mu);

/// Linear piece of a fiber map on [theta0, theta1] where the source density is
/// constant.
struct MapPiece {
  double theta0 = 0.0;
  double theta1 = 0.0;
  double value0 = 0.0;
  double value1 = 0.0;
  double density = 0.0;
};

/// Monotone rearrangement T between two fibers, kept piecewise linear so the
/// transport cost can be integrated exactly.
class FiberMap {
 public:
  FiberMap(ThetaGrid grid, std::vector<MapPiece> pieces);

  const ThetaGrid& grid() const { return grid_; }
  std::span<const MapPiece> pieces() const { return pieces_; }
  /// T at the cell centers.
  std::vector<double> values_at_centers() const;
  double operator()(double theta) const;
  bool is_monotone() const;
  /// int |theta - T(theta)|^2 d(source)
  double displacement_norm_squared() const;

 private:
  ThetaGrid grid_;
  std::vector<MapPiece> pieces_;
};

/// Absolute-continuity threshold for source fibers.
inline constexpr double kAcThreshold = 1e-14;

FiberMap fiber_optimal_map(const FiberMeasure& from, const FiberMeasure& to);

struct LOptimalMap {
  TorusGrid torus;
  std::vector<FiberMap> fibers;

  /// || p^2 - T ||_{L^2(mu)}
  double displacement_norm() const;
};

LOptimalMap l_optimal_map(const GridMeasure& mu, const GridMeasure& nu);

/// Displacement interpolation ((1-t) Id + t T)_# mu0, re-binned onto the grid
/// by depositing each transported piece proportionally to cell overlap.
GridMeasure geodesic(const GridMeasure& mu0, const GridMeasure& mu1, double t);

/// Pushes the source measure of `map` through (1 - t) Id + t T and deposits
/// the result on the theta grid (cell masses, not densities).
std::vector<double> push_forward_masses(const FiberMap& map, double t);

struct MetricDerivative {
  double value = 0.0;
  /// Set when the index sits on the curve boundary and a one-sided
  /// difference was used.
  bool one_sided = false;
};

/// Central difference W^L(mu_{k-1}, mu_{k+1}) / (2h); one-sided at the ends.
MetricDerivative metric_derivative(const MeasureCurve& curve, std::size_t index);

}  // namespace fibered
