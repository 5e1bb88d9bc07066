#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "fibered/curve.hpp"
#include "fibered/micro.hpp"
#include "fibered/model.hpp"
#include "fibered/pde.hpp"

namespace fibered {

struct DissipationRow {
  double t = 0.0;
  double energy = 0.0;
  double slope_squared = 0.0;
  double speed_squared = 0.0;
  bool one_sided = false;
  /// The slope neglected more than 1e-10 of mass in masked cells.
  bool masked = false;
};

struct DissipationReport {
  double energy_start = 0.0;
  double energy_end = 0.0;
  /// int |dF|^2 dt and int |mu'|^2 dt (trapezoid)
  double slope_integral = 0.0;
  double speed_integral = 0.0;
  /// F(mu_T) - F(mu_0) + (slope_integral + speed_integral) / 2
  double residual = 0.0;
  std::vector<DissipationRow> rows;
};

DissipationReport dissipation(const MeasureCurve& curve, const ModelParams& p);

/// Product-measure states at equispaced times.
struct ProductCurve {
  std::vector<double> times;
  std::vector<ProductMeasure> states;
};

/// (1/N) times the microscopic dissipation functional; speeds aggregate the
/// per-site W2 distances.
DissipationReport micro_dissipation(const ProductCurve& curve, const ModelParams& p);

struct RateReport {
  double dissipation = 0.0;
  double initial_entropy = 0.0;
  /// dissipation / 2 + initial_entropy
  double rate = 0.0;
};

RateReport ldp_rate(const MeasureCurve& curve, const GridMeasure& mu0_ref, const ModelParams& p);

void write_report_json(const std::filesystem::path& path, const DissipationReport& r);
void write_report_table(const std::filesystem::path& path, const DissipationReport& r);

struct HydroConfig {
  std::vector<int> n_ladder{64, 256, 1024};
  std::vector<std::uint64_t> seeds;
  double dt = 1e-3;
  std::vector<double> times{0.1, 0.5};
  /// x-blocks used to compare particle clouds with mu_t.
  int blocks = 8;
  /// Solver settings for the product surrogate (output interval must hit `times`).
  PdeConfig pde;
};

struct HydroRow {
  int n = 0;
  double t = 0.0;
  /// |(1/N) H^N(surrogate_t) - F(mu_t)|
  double gap = 0.0;
  /// Median over seeds of the block W^L distance between particles and mu_t.
  double w2 = 0.0;
  int seeds = 0;
  /// Empty unless this N failed.
  std::string error;
};

/// Block distance sqrt((1/B) sum_b W2(particles in block b, block average of mu)^2).
double block_distance(const ParticleState& s, const GridMeasure& mu, int blocks);

/// `mu_curve` is the macroscopic solution; its state at t = 0 seeds the
/// recovery sequences. Rows at t = 0 carry the initial free-energy gap.
std::vector<HydroRow> hydrodynamic_gap(const MeasureCurve& mu_curve, const ModelParams& p, const HydroConfig& cfg);

void write_hydro_table(const std::filesystem::path& path, const std::vector<HydroRow>& rows);

}  // namespace fibered
