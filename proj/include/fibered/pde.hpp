#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "fibered/curve.hpp"
#include "fibered/measures.hpp"
#include "fibered/model.hpp"

namespace fibered {

enum class FluxScheme { exponential_fitting, central };

FluxScheme parse_flux_scheme(const std::string& name);
std::string to_string(FluxScheme s);

struct PdeConfig {
  /// Inner step; 0 picks 0.25 dtheta^2, halved until below the stability bound.
  double dt = 0.0;
  double horizon = 1.0;
  /// Spacing of recorded states; the inner step is shrunk to divide it.
  double output_interval = 0.01;
  FluxScheme scheme = FluxScheme::exponential_fitting;
  /// Restarts with a halved step after an integration failure.
  int max_halvings = 4;
};

class IntegrationFailure : public std::runtime_error {
 public:
  IntegrationFailure(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// z / (e^z - 1)
double bernoulli(double z);

/// Largest stable explicit step over all magnetizations |m| <= sup|J| max|theta|.
double stability_bound(const Grid& grid, const ModelParams& p, FluxScheme scheme);

/// Zero-flux drift-diffusion step per fiber with drift Psi' - m(x) frozen at
/// the pre-step magnetization.
GridMeasure pde_step(const GridMeasure& mu, const ModelParams& p, double dt,
                     FluxScheme scheme = FluxScheme::exponential_fitting);

struct Observables {
  double t = 0.0;
  double free_energy = 0.0;
  double entropy = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double slope = 0.0;
  double metric_derivative = 0.0;
  double fiber_mass_error = 0.0;
  /// Largest per-fiber mass in the two outermost theta cells.
  double boundary_mass = 0.0;
};

Observables observe(double t, const GridMeasure& mu, const ModelParams& p);
/// Fills metric_derivative from the curve (one-sided at the ends).
void attach_metric_derivatives(const MeasureCurve& curve, std::vector<Observables>& obs);
void write_observables(const std::filesystem::path& path, const std::vector<Observables>& obs);

struct PdeResult {
  MeasureCurve curve;
  std::vector<Observables> observables;
  double dt = 0.0;
  double stability_bound = 0.0;
  long steps = 0;
  int halvings = 0;
};

PdeResult solve_pde(const GridMeasure& mu0, const ModelParams& p, const PdeConfig& cfg);

}  // namespace fibered
