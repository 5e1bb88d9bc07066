#pragma once

#include <vector>

#include "fibered/measures.hpp"

namespace fibered {

/// Time-indexed sequence of measures on one grid with a uniform time step.
class MeasureCurve {
 public:
  MeasureCurve() = default;
  MeasureCurve(std::vector<double> times, std::vector<GridMeasure> states);

  void push_back(double t, GridMeasure state);

  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const std::vector<double>& times() const { return times_; }
  const std::vector<GridMeasure>& states() const { return states_; }
  const GridMeasure& state(std::size_t k) const { return states_.at(k); }
  double time(std::size_t k) const { return times_.at(k); }
  const GridMeasure& front() const { return states_.front(); }
  const GridMeasure& back() const { return states_.back(); }
  /// Spacing of the sample times (0 for fewer than two samples).
  double step() const;

  /// Same states in reverse order on the same time axis.
  MeasureCurve reversed() const;

 private:
  std::vector<double> times_;
  std::vector<GridMeasure> states_;
};

}  // namespace fibered
