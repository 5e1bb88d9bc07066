#include "fibered/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace fibered {

namespace {

constexpr int kAssumptionSamples = 10000;

}  // namespace

Polynomial::Polynomial(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  for (double c : coeffs_) {
    if (!std::isfinite(c)) throw std::invalid_argument("Polynomial: non-finite coefficient");
  }
}

double Polynomial::operator()(double t) const {
  double s = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) s = s * t + *it;
  return s;
}

double Polynomial::derivative(double t) const {
  double s = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 1;) s = s * t + static_cast<double>(k) * coeffs_[k];
  return s;
}

double Polynomial::second_derivative(double t) const {
  double s = 0.0;
  for (std::size_t k = coeffs_.size(); k-- > 2;) {
    s = s * t + static_cast<double>(k * (k - 1)) * coeffs_[k];
  }
  return s;
}

Kernel Kernel::constant(double c) {
  Kernel k;
  k.kind_ = Kind::constant;
  k.amplitude_ = c;
  return k;
}

Kernel Kernel::cosine(double amplitude) {
  Kernel k;
  k.kind_ = Kind::cosine;
  k.amplitude_ = amplitude;
  return k;
}

Kernel Kernel::tabulated(std::vector<double> samples) {
  if (samples.empty()) throw std::invalid_argument("Kernel::tabulated: no samples");
  for (double v : samples) {
    if (!std::isfinite(v)) throw std::invalid_argument("Kernel::tabulated: non-finite sample");
  }
  Kernel k;
  k.kind_ = Kind::tabulated;
  k.samples_ = std::move(samples);
  return k;
}

double Kernel::operator()(double x) const {
  switch (kind_) {
    case Kind::constant:
      return amplitude_;
    case Kind::cosine:
      return amplitude_ * std::cos(2.0 * std::numbers::pi * x);
    case Kind::tabulated: {
      const auto n = static_cast<double>(samples_.size());
      double s = (x - std::floor(x)) * n;
      const auto k = static_cast<std::size_t>(std::floor(s));
      const double f = s - static_cast<double>(k);
      const std::size_t a = k % samples_.size();
      const std::size_t b = (a + 1) % samples_.size();
      return (1.0 - f) * samples_[a] + f * samples_[b];
    }
  }
  return 0.0;
}

double Kernel::sup_norm() const {
  if (kind_ == Kind::tabulated) {
    double m = 0.0;
    for (double v : samples_) m = std::max(m, std::abs(v));
    return m;
  }
  return std::abs(amplitude_);
}

bool Kernel::is_symmetric(int n, double tol) const {
  for (int k = 0; k < n; ++k) {
    const double x = static_cast<double>(k) / n;
    if (std::abs((*this)(x) - (*this)(static_cast<double>((n - k) % n) / n)) > tol) return false;
  }
  return true;
}

std::vector<double> Kernel::circulant_table(int n) const {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = (*this)(static_cast<double>(k) / n);
  return t;
}

std::string Kernel::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case Kind::constant:
      os << "constant(" << amplitude_ << ")";
      break;
    case Kind::cosine:
      os << "cosine(" << amplitude_ << ")";
      break;
    case Kind::tabulated:
      os << "tabulated(" << samples_.size() << " samples)";
      break;
  }
  return os.str();
}

ModelParams::ModelParams(Polynomial psi, Kernel j, GrowthConstants growth, double theta_min,
                         double theta_max)
    : psi_(std::move(psi)),
      j_(std::move(j)),
      growth_(growth),
      theta_min_(theta_min),
      theta_max_(theta_max),
      lambda_hat_(0.0) {
  if (!(theta_min < theta_max)) throw std::invalid_argument("ModelParams: theta_min must be < theta_max");
  if (growth_.ell < 1) throw std::invalid_argument("ModelParams: ell must be >= 1");
  double lo = psi_.second_derivative(theta_min_);
  for (int k = 0; k <= kAssumptionSamples; ++k) {
    const double t = theta_min_ + (theta_max_ - theta_min_) * k / kAssumptionSamples;
    lo = std::min(lo, psi_.second_derivative(t));
  }
  lambda_hat_ = lo;
}

ModelParams ModelParams::default_model() {
  // theta^4/8 - 1.1 theta^2 >= -2.42, so Psi >= theta^4/8 + 0.6 theta^2 - 2.5.
  return ModelParams(Polynomial({0.0, 0.0, -0.5, 0.0, 0.25}), Kernel::cosine(0.5),
                     GrowthConstants{0.125, 0.6, 2.5, 2}, -6.0, 6.0);
}

double ModelParams::tau_limit() const {
  const double l = lambda();
  return l >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / l;
}

ModelParams ModelParams::with_kernel(Kernel j) const {
  return ModelParams(psi_, std::move(j), growth_, theta_min_, theta_max_);
}

AssumptionReport check_assumptions(const ModelParams& p) {
  AssumptionReport r;
  const auto& g = p.growth();
  double margin = std::numeric_limits<double>::infinity();
  for (int k = 0; k < kAssumptionSamples; ++k) {
    const double t = p.theta_min() + (p.theta_max() - p.theta_min()) * (k + 0.5) / kAssumptionSamples;
    const double bound = g.c_psi * std::pow(t, 2 * g.ell) + g.c1_psi * t * t - g.c2_psi;
    margin = std::min(margin, p.psi()(t) - bound);
  }
  r.growth_margin = margin;
  if (margin < 0.0) {
    r.growth_ok = false;
    r.problems.push_back("model.growth: Psi falls below C_Psi theta^(2 ell) + C'_Psi theta^2 - C''_Psi");
  }
  if (g.c_psi < 0.0 || g.c2_psi < 0.0) {
    r.growth_ok = false;
    r.problems.push_back("model.growth: C_Psi and C''_Psi must be nonnegative");
  }
  if (!p.kernel().is_symmetric(1024)) {
    r.kernel_symmetric = false;
    r.problems.push_back("model.kernel: J is not symmetric");
  }
  if (!(g.c1_psi > p.kernel().sup_norm())) {
    r.c1_exceeds_kernel = false;
    r.problems.push_back("model.growth: C'_Psi must exceed sup|J|");
  }
  if (p.psi().degree() % 2 != 0) {
    r.even_degree = false;
    r.problems.push_back("model.psi: polynomial degree must be even");
  }
  return r;
}

double free_energy_lower_bound_constant(const ModelParams& p) {
  double entropy_floor = std::log(p.theta_max() - p.theta_min());
  const double jn = p.kernel().sup_norm();
  if (jn > 0.0) entropy_floor = std::min(entropy_floor, 0.5 * std::log(2.0 * std::numbers::pi / jn));
  return p.growth().c2_psi + entropy_floor;
}

}  // namespace fibered
