#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <stdexcept>
#include <vector>

#include "fibered/measures.hpp"
#include "fibered/micro.hpp"
#include "fibered/model.hpp"

namespace fibered {

struct ParticleTrajectory {
  std::vector<double> times;
  std::vector<ParticleState> states;
  std::uint64_t seed = 0;
};

struct SimulateOptions {
  /// Multiplies the Brownian increment; 0 gives the deterministic ODE.
  double noise_scale = 1.0;
  /// Record every k-th step (the initial and final states are always kept).
  int record_every = 1;
};

class ParticleBlowUp : public std::runtime_error {
 public:
  ParticleBlowUp(const std::string& what, long step) : std::runtime_error(what), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

/// Euler-Maruyama for d theta^i = b_i dt + sqrt(2) dB^i with
/// b_i = -Psi'(theta^i) + (1/N) sum_j J((i-j)/N) theta^j. The noise of
/// particle i at step n depends only on (seed, i, n).
ParticleTrajectory simulate(const ParticleState& theta0, const ModelParams& p, double dt, double horizon,
                            std::uint64_t seed, const SimulateOptions& opts = {});

void write_trajectory(const std::filesystem::path& path, const ParticleTrajectory& traj);

/// kappa(x, theta) exp(-Psi(theta)) must integrate to 1 in theta at every site.
using InitialDensity = std::function<double(double x, double theta)>;

/// Independent inverse-CDF draws theta^k ~ kappa(k/N, .) exp(-Psi) on the cells of `tg`.
ParticleState sample_initial(const ModelParams& p, const InitialDensity& kappa, const ThetaGrid& tg, int n,
                             std::uint64_t seed);

/// Independent draws theta^k ~ nu_k.
ParticleState sample_product(const ProductMeasure& nu, std::uint64_t seed);

/// K^N: atoms (k/N, theta^k) of mass 1/N.
struct EmpiricalPairMeasure {
  std::vector<double> x;
  std::vector<double> theta;
  double mass = 0.0;
};

EmpiricalPairMeasure kmap(const ParticleState& s);
/// L^N: Lebesgue on [k/N, (k+1)/N) times delta at theta^k.
FiberedDiscreteMeasure lmap(const ParticleState& s);

/// Cost of the coupling that moves each x in [k/N, (k+1)/N) to the site k/N
/// and keeps theta: an upper bound for W2(K^N, L^N) on T x R.
double k_vs_l_distance(const ParticleState& s);

/// Site-k fiber = average of mu's fibers over [k/N, (k+1)/N). Needs N | n_x.
ProductMeasure recovery_sequence(const GridMeasure& mu, int n);
/// mu with every fiber replaced by its block average over n blocks (same grid).
GridMeasure coarsen(const GridMeasure& mu, int n);

/// Per-site histograms of particle samples; particle k of a state with N
/// spins belongs to site floor(k n_x / N). Fibers are normalized.
GridMeasure empirical_to_grid(const std::vector<ParticleState>& samples, const Grid& grid);

}  // namespace fibered
