#include "fibered/quantile.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fibered {

namespace {

constexpr double kCoverageTolerance = 1e-9;

double lerp_segment(const QuantileSegment& s, double u) {
  const double len = s.u1 - s.u0;
  if (len <= 0.0) return s.q0;
  return s.q0 + (s.q1 - s.q0) * ((u - s.u0) / len);
}

}  // namespace

QuantileFunction::QuantileFunction(std::vector<QuantileSegment> segments)
    : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("QuantileFunction: no segments");
  if (std::abs(segments_.front().u0) > kCoverageTolerance ||
      std::abs(segments_.back().u1 - 1.0) > kCoverageTolerance) {
    throw std::invalid_argument("QuantileFunction: segments must cover [0, 1] (measure not normalized)");
  }
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    const auto& s = segments_[k];
    if (!(s.u1 >= s.u0) || !(s.q1 >= s.q0)) {
      throw std::invalid_argument("QuantileFunction: segment is not nondecreasing");
    }
    if (k > 0) {
      const auto& p = segments_[k - 1];
      if (std::abs(p.u1 - s.u0) > kCoverageTolerance) {
        throw std::invalid_argument("QuantileFunction: segments do not tile [0, 1]");
      }
      if (s.q0 < p.q1 - 1e-12 * (1.0 + std::abs(p.q1))) {
        throw std::invalid_argument("QuantileFunction: values decrease across segments");
      }
    }
  }
  segments_.front().u0 = 0.0;
  segments_.back().u1 = 1.0;
}

QuantileFunction QuantileFunction::of(const FiberMeasure& f) {
  const auto& g = f.grid();
  double total = 0.0;
  for (int j = 0; j < g.n_theta; ++j) total += f.cell_mass(j);
  if (!(total > 0.0)) throw std::invalid_argument("QuantileFunction: zero-mass fiber");
  if (std::abs(total - 1.0) > kCoverageTolerance) {
    throw std::invalid_argument("QuantileFunction: fiber not normalized");
  }
  std::vector<QuantileSegment> segs;
  segs.reserve(static_cast<std::size_t>(g.n_theta));
  double cum = 0.0;
  for (int j = 0; j < g.n_theta; ++j) {
    const double m = f.cell_mass(j);
    if (m <= 0.0) continue;
    const double next = cum + m;
    // Rounding can push the running sum past 1; clamp so segments stay ordered.
    segs.push_back({std::min(cum / total, 1.0), std::min(next / total, 1.0), g.edge(j), g.edge(j + 1)});
    cum = next;
  }
  segs.back().u1 = 1.0;
  return QuantileFunction(std::move(segs));
}

QuantileFunction QuantileFunction::of(const DiscreteFiber& f) {
  std::vector<QuantileSegment> segs;
  segs.reserve(f.size());
  double cum = 0.0;
  for (const auto& a : f.atoms()) {
    const double next = cum + a.mass;
    segs.push_back({std::min(cum, 1.0), std::min(next, 1.0), a.location, a.location});
    cum = next;
  }
  segs.back().u1 = 1.0;
  return QuantileFunction(std::move(segs));
}

double QuantileFunction::operator()(double u) const {
  if (u <= 0.0) return segments_.front().q0;
  // First segment whose right end reaches u: gives the left-continuous inverse.
  auto it = std::lower_bound(segments_.begin(), segments_.end(), u,
                             [](const QuantileSegment& s, double v) { return s.u1 < v; });
  if (it == segments_.end()) return segments_.back().q1;
  return lerp_segment(*it, u);
}

std::vector<double> QuantileFunction::on_uniform_nodes(int m) const {
  if (m < 2) throw std::invalid_argument("QuantileFunction::on_uniform_nodes: m must be >= 2");
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(m));
  for (int k = 0; k < m; ++k) out.push_back((*this)((k + 0.5) / m));
  return out;
}

double w2_squared(const QuantileFunction& a, const QuantileFunction& b) {
  auto sa = a.segments();
  auto sb = b.segments();
  std::size_t ia = 0, ib = 0;
  double u = 0.0;
  double acc = 0.0;
  while (ia < sa.size() && ib < sb.size()) {
    const double end = std::min(sa[ia].u1, sb[ib].u1);
    const double len = end - u;
    if (len > 0.0) {
      const double d0 = lerp_segment(sa[ia], u) - lerp_segment(sb[ib], u);
      const double d1 = lerp_segment(sa[ia], end) - lerp_segment(sb[ib], end);
      acc += len * (d0 * d0 + d0 * d1 + d1 * d1) / 3.0;
    }
    u = std::max(u, end);
    if (sa[ia].u1 <= end) ++ia;
    if (ib < sb.size() && sb[ib].u1 <= end) ++ib;
  }
  return acc;
}

}  // namespace fibered
