#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "fibered/measures.hpp"
#include "fibered/model.hpp"

namespace fibered {

/// Cells with density below this are excluded from logarithms and quotients.
inline constexpr double kDensityMask = 1e-14;

/// m(x_i) = sum_k J(x_i - x_k) (int theta dmu^{x_k}) dx
struct MagnetizationField {
  std::vector<double> values;

  double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

MagnetizationField magnetization(const GridMeasure& mu, const ModelParams& p);
/// Same convolution applied to given fiber means.
MagnetizationField magnetization_from_means(std::span<const double> means, const Kernel& j);

double entropy(const GridMeasure& mu);
double potential_energy(const GridMeasure& mu, const ModelParams& p);
double interaction_energy(const GridMeasure& mu, const ModelParams& p);
double free_energy(const GridMeasure& mu, const ModelParams& p);

struct FreeEnergyParts {
  double entropy = 0.0;
  double potential = 0.0;
  double interaction = 0.0;
  double total = 0.0;
};

FreeEnergyParts free_energy_parts(const GridMeasure& mu, const ModelParams& p);

inline constexpr double kInfiniteEntropy = std::numeric_limits<double>::infinity();

/// sum rho log(rho / ref) dx dtheta; +inf when ref vanishes where rho does not.
double relative_entropy(const GridMeasure& mu, const GridMeasure& ref);
/// `ref` holds an unnormalized reference density per cell (row-major).
double relative_entropy(const GridMeasure& mu, std::span<const double> ref);

/// Centered difference of a fiber at cell centers, second-order one-sided at
/// the two ends.
std::vector<double> theta_derivative(std::span<const double> f, double h);

struct SlopeField {
  Grid grid;
  /// w per cell; zero on masked cells.
  std::vector<double> w;
  std::vector<char> mask;
  /// mu-mass carried by masked cells.
  double masked_mass = 0.0;

  double at(int i, int j) const {
    return w[static_cast<std::size_t>(i) * static_cast<std::size_t>(grid.n_theta()) +
             static_cast<std::size_t>(j)];
  }
};

SlopeField slope_field(const GridMeasure& mu, const ModelParams& p);
/// ||w||_{L^2(mu)}
double metric_slope(const GridMeasure& mu, const ModelParams& p);
double metric_slope(const GridMeasure& mu, const SlopeField& w);

/// A test function sampled at the grid cells (row-major).
using TestField = std::vector<double>;

/// max over the family of |int (beta (Psi' - m) - d_theta beta) dmu| / ||beta||_{L^2(mu)}.
/// The d_theta beta term is paired with rho through the adjoint of
/// theta_derivative, so the quotient never exceeds metric_slope.
double variational_slope(const GridMeasure& mu, const ModelParams& p,
                         const std::vector<TestField>& family);

/// Products H_a(theta) * {1, cos(2 pi b x), sin(2 pi b x)} of probabilists'
/// Hermite polynomials and Fourier modes, first `count` in a fixed order.
std::vector<TestField> hermite_fourier_family(const Grid& grid, int count);

/// Fibers proportional to exp(-Psi) at the cell centers.
GridMeasure gibbs_measure(const Grid& grid, const ModelParams& p);

}  // namespace fibered
