#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fibered/analysis.hpp"
#include "fibered/jko.hpp"
#include "fibered/measures.hpp"
#include "fibered/model.hpp"
#include "fibered/pde.hpp"

namespace fibered {

/// Validation failure; the message starts with the offending key path.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModelSpec {
  std::vector<double> psi{0.0, 0.0, -0.5, 0.0, 0.25};
  std::string kernel = "cosine";
  double kernel_amplitude = 0.5;
  std::vector<double> kernel_samples;
  GrowthConstants growth{0.125, 0.6, 2.5, 2};
};

struct GridSpec {
  int n_x = 64;
  int n_theta = 256;
  double theta_min = -6.0;
  double theta_max = 6.0;
};

/// Gaussian fibers N(mean + mean_amplitude cos(2 pi x), variance), or the
/// Gibbs fibers exp(-Psi) / Z.
struct InitialSpec {
  std::string kind = "gaussian";
  double mean = 0.3;
  double mean_amplitude = 0.8;
  double variance = 0.3;
};

struct ParticleSpec {
  int n = 256;
  double dt = 1e-3;
  double horizon = 0.5;
  std::vector<std::uint64_t> seeds{1};
  int record_every = 100;
};

struct CheckSpec {
  /// Largest admissible metric slope at the final time (pde runs).
  std::optional<double> final_slope_below;
  /// Uphill slack for the free energy along a curve.
  double energy_slack = 1e-9;
  /// |residual| bound for the dissipation functional, relative to int |dF|^2.
  double dissipation_relative = 0.02;
  /// Skip the slow criteria of the invariant suite.
  bool quick = false;
};

struct RunConfig {
  std::string experiment = "pde";
  ModelSpec model;
  GridSpec grid;
  InitialSpec initial;
  PdeConfig pde;
  JkoConfig jko;
  double jko_horizon = 0.5;
  ParticleSpec particles;
  HydroConfig ladder;
  /// Grid size of the macroscopic reference in the hydrodynamic ladder.
  int ladder_n_x = 1024;
  int ladder_seed_count = 16;
  CheckSpec checks;
  bool write_states = true;
  /// Verbatim config text, echoed into manifest.json.
  std::string source;
};

RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(const std::string& text, const std::string& origin = "<string>");

ModelParams make_model(const RunConfig& cfg);
Grid make_grid(const GridSpec& g);
GridMeasure make_initial(const Grid& grid, const InitialSpec& init, const ModelParams& p);

}  // namespace fibered
