#pragma once

#include <string>
#include <vector>

#include "fibered/grid.hpp"

namespace fibered {

/// Real polynomial sum_k c_k theta^k.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> coeffs);

  const std::vector<double>& coeffs() const { return coeffs_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }

  double operator()(double t) const;
  double derivative(double t) const;
  double second_derivative(double t) const;

 private:
  std::vector<double> coeffs_{0.0};
};

/// Symmetric interaction kernel on the unit torus.
class Kernel {
 public:
  enum class Kind { constant, cosine, tabulated };

  /// J(x) = c
  static Kernel constant(double c);
  /// J(x) = amplitude * cos(2 pi x)
  static Kernel cosine(double amplitude);
  /// Samples at x = k / n, linearly interpolated and extended periodically.
  static Kernel tabulated(std::vector<double> samples);

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  const std::vector<double>& samples() const { return samples_; }

  double operator()(double x) const;
  double sup_norm() const;
  /// J(x) = J(-x) at the points k / n.
  bool is_symmetric(int n, double tol = 1e-12) const;
  /// J(k / n) for k = 0..n-1; row i of the circulant matrix reads table[(i - j) mod n].
  std::vector<double> circulant_table(int n) const;

  std::string describe() const;

 private:
  Kind kind_ = Kind::constant;
  double amplitude_ = 0.0;
  std::vector<double> samples_;
};

/// Growth constants in Psi(theta) >= c_psi theta^(2 ell) + c1_psi theta^2 - c2_psi.
struct GrowthConstants {
  double c_psi = 0.0;
  double c1_psi = 0.0;
  double c2_psi = 0.0;
  int ell = 1;
};

/// Confinement Psi, interaction J and the derived convexity constants. The
/// convexity modulus of Psi is sampled on the truncated spin domain.
class ModelParams {
 public:
  ModelParams(Polynomial psi, Kernel j, GrowthConstants growth, double theta_min, double theta_max);

  /// Psi = theta^4/4 - theta^2/2, J = 0.5 cos(2 pi x) on [-6, 6].
  static ModelParams default_model();

  const Polynomial& psi() const { return psi_; }
  const Kernel& kernel() const { return j_; }
  const GrowthConstants& growth() const { return growth_; }
  double theta_min() const { return theta_min_; }
  double theta_max() const { return theta_max_; }

  double lambda_bar() const { return -j_.sup_norm(); }
  double lambda_hat() const { return lambda_hat_; }
  double lambda() const { return lambda_bar() + lambda_hat_; }
  /// Largest admissible step 1 / lambda^- (infinite for lambda >= 0).
  double tau_limit() const;

  /// Same Psi and growth data with a different kernel.
  ModelParams with_kernel(Kernel j) const;

 private:
  Polynomial psi_;
  Kernel j_;
  GrowthConstants growth_;
  double theta_min_;
  double theta_max_;
  double lambda_hat_;
};

struct AssumptionReport {
  bool growth_ok = true;
  bool kernel_symmetric = true;
  bool c1_exceeds_kernel = true;
  bool even_degree = true;
  /// min over samples of Psi - (growth lower bound)
  double growth_margin = 0.0;
  std::vector<std::string> problems;

  bool ok() const { return problems.empty(); }
};

/// Samples the growth bound at 10^4 points, the kernel symmetry and the
/// condition C'_Psi > sup|J|.
AssumptionReport check_assumptions(const ModelParams& p);

/// Constant C'' in F(mu) >= int (C_Psi |theta|^(2 ell) + (C'_Psi - |J|) theta^2) dmu - C''
/// for measures supported on [theta_min, theta_max].
double free_energy_lower_bound_constant(const ModelParams& p);

}  // namespace fibered
