#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "fibered/analysis.hpp"
#include "fibered/measures.hpp"
#include "fibered/model.hpp"
#include "fibered/pde.hpp"

namespace fibered {

struct CheckResult {
  int id = 0;
  std::string name;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

/// Smooth random measure: every fiber is a two-bump Gaussian mixture with its
/// own means, widths and weights.
GridMeasure random_measure(const Grid& grid, std::mt19937_64& rng);

/// Random discrete fiber with 1..max_atoms atoms in [-3, 3].
DiscreteFiber random_discrete(std::mt19937_64& rng, int max_atoms);

/// Gaussian fibers N(mean + amplitude cos(2 pi x), variance).
GridMeasure gaussian_measure(const Grid& grid, double mean, double amplitude, double variance);

/// Indicator pair from the W^L / W2 counterexample on n_x sites: mu sits at 0
/// on the first half of the torus and at 1 on the second, nu the other way.
std::pair<FiberedDiscreteMeasure, FiberedDiscreteMeasure> counterexample_pair(int n_x);

/// One level of the energy-identity refinement ladder.
struct LadderLevel {
  int n_theta = 0;
  double output_interval = 0.0;
  double dt = 0.0;
  DissipationReport report;
};

struct EnergyLadder {
  std::vector<LadderLevel> levels;
  /// Gradient-flow curve of the finest level.
  MeasureCurve finest;
  /// |residual| of the finest level.
  double epsilon_grid = 0.0;
};

struct LadderSpec {
  int n_x = 64;
  std::vector<int> n_theta{128, 256, 512};
  std::vector<double> output_interval{0.02, 0.01, 0.005};
  double horizon = 0.5;
  double theta_min = -6.0;
  double theta_max = 6.0;
};

EnergyLadder energy_ladder(const ModelParams& p, const LadderSpec& spec);

CheckResult check_counterexample(int n_x = 40);
CheckResult check_transport_oracle(std::uint64_t seed, int pairs = 500);
CheckResult check_metric_axioms(std::uint64_t seed, int triples = 200);
CheckResult check_geodesic_speed(std::uint64_t seed, int pairs = 20);
CheckResult check_energy_identity(const EnergyLadder& ladder);
CheckResult check_contractivity(const ModelParams& p, const Grid& grid, std::uint64_t seed, int pairs = 5);
CheckResult check_slope_formula(const ModelParams& p, std::uint64_t seed, int measures = 50);
CheckResult check_jko_pde(const ModelParams& p, const Grid& grid);
CheckResult check_k_vs_l(std::uint64_t seed, int states = 100);
CheckResult check_hydro(const ModelParams& p, const HydroConfig& cfg, int n_x, const ThetaGrid& theta);
CheckResult check_rate_zero(const EnergyLadder& ladder, const ModelParams& p);
CheckResult check_equilibrium(const ModelParams& p, const Grid& grid);

/// Settings shared by the invariant suite and the acceptance binary.
struct SuiteOptions {
  std::uint64_t seed = 20240611;
  /// Skips the slow criteria (energy ladder, rate zero, hydrodynamics).
  bool quick = false;
  int hydro_n_x = 1024;
  int hydro_seeds = 16;
};

/// Runs the numbered criteria 1..12 in order; `on_result` sees each result as
/// soon as it is available.
std::vector<CheckResult> run_suite(const ModelParams& p, const Grid& grid, const SuiteOptions& opts,
                                   const std::function<void(const CheckResult&)>& on_result = {});

std::string format_check(const CheckResult& r);

}  // namespace fibered
