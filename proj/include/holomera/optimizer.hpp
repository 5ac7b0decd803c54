#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "holomera/mera.hpp"

namespace holomera {

/// Translation-invariant nearest-neighbour Hamiltonian H = sum_i h_{i,i+1}.
struct LocalHamiltonian {
  /// d^2 x d^2 two-site term with legs ordered (left, right).
  Matrix h;
  double g = 1.0;
  int d = 2;
};

/// H = -sum (Z Z + g X) with the field split evenly over the two sites of each bond.
LocalHamiltonian ising_critical_hamiltonian(double g = 1.0);

/// Ground-state energy per site of the infinite transverse-field Ising chain, by quadrature of
/// the free-fermion dispersion: -(1/pi) int_0^pi sqrt(1 + g^2 + 2 g cos k) dk.
double ising_exact_energy(double g = 1.0);

struct FixedPointOptions {
  double tol = 1e-11;
  int max_iterations = 20000;
};

/// Two-site density reproduced by the averaged descending channel of the scale-invariant layer.
struct FixedPointDensity {
  Matrix rho2;
  /// Average of the two one-site marginals of rho2.
  Matrix rho1;
  int iterations = 0;
  double residual = 0.0;
};

/// Power iteration on the descending channel; `warm` seeds the iteration when given.
FixedPointDensity fixed_point_density(const ScaleInvariantMera& mera, const FixedPointOptions& opts = {},
                                      const Matrix* warm = nullptr);

/// Two-site densities at every level from the physical sites (index 0) up to the fixed point.
std::vector<Matrix> level_densities(const ScaleInvariantMera& mera, const Matrix& rho_top);

/// Tr(h rho_0) with rho_0 the physical two-site density.
double energy_per_site(const ScaleInvariantMera& mera, const LocalHamiltonian& h, const FixedPointDensity& fp);
double energy_per_site(const ScaleInvariantMera& mera, const LocalHamiltonian& h);

struct OptimizationReport {
  std::vector<double> energies;
  std::vector<double> isometry_residuals;
  int sweeps = 0;
  bool converged = false;
  bool diverged = false;
  std::string message;
};

struct OptimizeOptions {
  int sweeps = 200;
  std::uint64_t seed = 0;
  /// Output dimensions of transitional layers; empty picks one layer d -> chi when chi != d.
  std::vector<int> transitional_dims;
  bool auto_transitional = true;
  /// Number of scales over which the scale-invariant layer's environment is accumulated.
  int environment_levels = 1;
  /// Repeated u/w updates per layer and sweep.
  int inner_iterations = 1;
  double convergence_tol = 1e-8;
  int convergence_window = 5;
  FixedPointOptions fixed_point;
  /// Warm-started power steps per sweep; the returned network gets a fully converged fixed point.
  int refresh_iterations = 4;
  int checkpoint_every = 0;
  std::function<void(const ScaleInvariantMera&, const OptimizationReport&)> checkpoint;
  std::function<void(int sweep, double energy)> progress;
};

struct OptimizationResult {
  ScaleInvariantMera mera;
  OptimizationReport report;
  FixedPointDensity fixed_point;
};

OptimizationResult optimize(const LocalHamiltonian& h, int chi, const OptimizeOptions& opts);
/// Continues from an existing network.
OptimizationResult optimize(const LocalHamiltonian& h, ScaleInvariantMera start, const OptimizeOptions& opts);

/// Linearized environments of one layer for the fine-side operator `op` and coarse density `rho`,
/// summed over pair placements; shaped like u and w respectively.
struct LayerEnvironment {
  Tensor u;
  Tensor w;
};
LayerEnvironment layer_environment(const Layer& layer, const Matrix& op, const Matrix& rho);

}  // namespace holomera
