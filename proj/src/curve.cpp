#include "fibered/curve.hpp"

#include <cmath>
#include <stdexcept>

namespace fibered {

namespace {

void check_append(const std::vector<double>& times, const std::vector<GridMeasure>& states,
                  double t, const GridMeasure& state) {
  if (!std::isfinite(t)) throw std::invalid_argument("MeasureCurve: non-finite time");
  if (!times.empty()) {
    if (!(t > times.back())) throw std::invalid_argument("MeasureCurve: times must increase strictly");
    if (!(state.grid() == states.front().grid())) {
      throw std::invalid_argument("MeasureCurve: all states must share one grid");
    }
  }
}

}  // namespace

MeasureCurve::MeasureCurve(std::vector<double> times, std::vector<GridMeasure> states) {
  if (times.size() != states.size()) {
    throw std::invalid_argument("MeasureCurve: times and states differ in length");
  }
  times_.reserve(times.size());
  states_.reserve(states.size());
  for (std::size_t k = 0; k < times.size(); ++k) push_back(times[k], std::move(states[k]));
}

void MeasureCurve::push_back(double t, GridMeasure state) {
  check_append(times_, states_, t, state);
  times_.push_back(t);
  states_.push_back(std::move(state));
}

double MeasureCurve::step() const {
  if (times_.size() < 2) return 0.0;
  return (times_.back() - times_.front()) / static_cast<double>(times_.size() - 1);
}

MeasureCurve MeasureCurve::reversed() const {
  MeasureCurve out;
  out.times_ = times_;
  out.states_.assign(states_.rbegin(), states_.rend());
  return out;
}

}  // namespace fibered
