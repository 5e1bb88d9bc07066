#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fibered/curve.hpp"
#include "fibered/measures.hpp"
#include "fibered/model.hpp"
#include "fibered/pde.hpp"

namespace fibered {

struct JkoConfig {
  double tau = 0.05;
  /// Gauss-Seidel sweeps over the fibers per step.
  int max_sweeps = 50;
  /// Newton iterations per fiber per sweep.
  int max_newton = 200;
  /// Newton decrement (squared), relative to max(1, |objective|), below which a fiber counts as solved.
  double tolerance = 1e-15;
  /// Backtracking factor of the line search.
  double shrink = 0.5;
};

/// Rejects tau <= 0 and tau >= 1 / lambda^-.
void validate(const JkoConfig& cfg, const ModelParams& p);

class JkoFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JkoStepReport {
  /// F(mu_prev), the objective at the feasible point nu = mu_prev.
  double objective_start = 0.0;
  /// F(nu) + W^L(mu_prev, nu)^2 / (2 tau)
  double objective = 0.0;
  double decrease = 0.0;
  /// sqrt(sum_i dx g_i^T H_i^{-1} g_i) over the fiber blocks at the returned state.
  double grad_norm = 0.0;
  int inner_iters = 0;
  int sweeps = 0;
};

struct JkoStepResult {
  GridMeasure state;
  JkoStepReport report;
};

/// One minimizing-movement step: argmin F(nu) + W^L(mu_prev, nu)^2 / (2 tau)
/// over grid densities nu, solved fiber by fiber.
JkoStepResult jko_step(const GridMeasure& mu_prev, const ModelParams& p, const JkoConfig& cfg);

struct JkoResult {
  MeasureCurve curve;
  std::vector<JkoStepReport> diagnostics;
  std::vector<Observables> observables;
};

/// ceil(horizon / tau) steps; sample n sits at time n tau.
JkoResult solve_jko(const GridMeasure& mu0, const ModelParams& p, const JkoConfig& cfg, double horizon);

void write_jko_diagnostics(const std::filesystem::path& path, const std::vector<JkoStepReport>& diag);

/// Weighted least-squares projection onto nondecreasing sequences
/// (pool adjacent violators).
std::vector<double> isotonic_projection(std::span<const double> values, std::span<const double> weights);

}  // namespace fibered
