#pragma once

#include <span>
#include <vector>

#include "fibered/measures.hpp"

namespace fibered {

/// Linear piece of a quantile function: on [u0, u1] the value runs linearly
/// from q0 to q1. Atoms give constant pieces, uniform cells give sloped ones.
struct QuantileSegment {
  double u0 = 0.0;
  double u1 = 0.0;
  double q0 = 0.0;
  double q1 = 0.0;
};

/// Exact inverse CDF of a measure on R that is a finite mixture of atoms and
/// uniform cells. The segments tile [0, 1] in order and the values are
/// nondecreasing.
class QuantileFunction {
 public:
  explicit QuantileFunction(std::vector<QuantileSegment> segments);

  static QuantileFunction of(const FiberMeasure& f);
  static QuantileFunction of(const DiscreteFiber& f);

  std::span<const QuantileSegment> segments() const { return segments_; }

  /// Left-continuous inverse F^{-1}(u) = inf{theta : F(theta) >= u}.
  double operator()(double u) const;

  /// Values at the m equispaced nodes u_k = (k + 1/2) / m.
  std::vector<double> on_uniform_nodes(int m) const;

 private:
  std::vector<QuantileSegment> segments_;
};

/// int_0^1 |Fa^{-1}(u) - Fb^{-1}(u)|^2 du, evaluated exactly on the merged
/// breakpoints of the two piecewise-linear quantile functions.
double w2_squared(const QuantileFunction& a, const QuantileFunction& b);

}  // namespace fibered
