#pragma once

#include <vector>

#include "fibered/measures.hpp"
#include "fibered/model.hpp"

namespace fibered {

/// Spin values theta^k; particle k sits at site k / N.
struct ParticleState {
  std::vector<double> thetas;

  int size() const { return static_cast<int>(thetas.size()); }
};

/// sum_i Psi(theta^i) + (1/2N) sum_{i,j} J((i-j)/N) theta^i theta^j
double hamiltonian(const ParticleState& s, const ModelParams& p);
std::vector<double> hamiltonian_gradient(const ParticleState& s, const ModelParams& p);

/// Energy whose negative gradient is the SDE drift:
/// sum_i Psi(theta^i) - (1/2N) sum_{i,j} J((i-j)/N) theta^i theta^j
double drift_energy(const ParticleState& s, const ModelParams& p);
/// b_i = -Psi'(theta^i) + (1/N) sum_j J((i-j)/N) theta^j
std::vector<double> drift(const ParticleState& s, const ModelParams& p);

/// Product measure nu_0 x ... x nu_{N-1} with site k at k / N.
struct ProductMeasure {
  std::vector<FiberMeasure> sites;

  int size() const { return static_cast<int>(sites.size()); }
};

/// (1/N) H(nu | exp(-drift_energy) Leb), exact on product measures.
double micro_free_energy(const ProductMeasure& nu, const ModelParams& p);

/// (1/N) int |grad log f + grad drift_energy|^2 f, exact on product measures.
double micro_slope(const ProductMeasure& nu, const ModelParams& p);

/// Product measure whose site fibers are the fibers of mu (N = n_x).
ProductMeasure product_of_fibers(const GridMeasure& mu);
/// GridMeasure with one fiber per site (inverse of product_of_fibers).
GridMeasure grid_of_product(const ProductMeasure& nu);

}  // namespace fibered
