#pragma once

#include <string>
#include <vector>

#include "holomera/correlator.hpp"
#include "holomera/mera.hpp"
#include "holomera/mps.hpp"

namespace holomera {

/// Block entropies in nats against block size.
struct EntropyCurve {
  std::vector<long> ell;
  std::vector<double> entropy;
  std::string network_id;
  CapKind cap = CapKind::product;

  /// Throws InvalidArgument for negative or non-finite entropies, a non-zero value at ell = 0,
  /// negative sizes or mismatched lengths.
  void validate() const;
};

/// Eigenvalues below 1e-14 count as zero.
inline constexpr double kEntropyFloor = 1e-14;

/// -sum p log p over the spectrum of a Hermitian density matrix.
double von_neumann_entropy(const Matrix& rho);
double entropy_of_spectrum(const Eigen::VectorXd& p);

/// Largest dense reduced density handled by block_entropy, in matrix dimension.
inline constexpr std::size_t kDenseBlockLimit = 4096;

/// Entropy of sites [first, first + ell) from the dense reduced density.
/// Throws InvalidArgument when the density exceeds kDenseBlockLimit.
double block_entropy(const ScaleInvariantMera& net, const Matrix& rho2, long ell, long first = 0);

/// Dense for small blocks, otherwise through the purified chain.
double block_entropy(const FiniteRangeMera& net, long ell, long first = 0);

/// Block entropy of sites [first, first + ell) of an infinite chain. Ancillas whose cap site feeds
/// only sites inside the block are grouped with it and contribute log chi each; the others are
/// traced with the environment.
double block_entropy(const PurifiedChain& chain, long ell, long first = 0);

/// Entropy of `block` (site indices) of a pure state on n sites of dimension d, from the singular
/// values of the state reshaped across the cut.
double block_entropy(const Vector& psi, std::size_t d, const std::vector<long>& block);

/// Average over `offsets` consecutive starting sites.
EntropyCurve entropy_curve(const ScaleInvariantMera& net, const Matrix& rho2, const std::vector<long>& ells,
                           int offsets = 1, const std::string& id = "");
EntropyCurve entropy_curve(const FiniteRangeMera& net, const std::vector<long>& ells, int offsets = 1,
                           const std::string& id = "");

enum class EntropyModel { log, linear_plus_log };
std::string to_string(EntropyModel m);
EntropyModel entropy_model_from_string(const std::string& s);

struct EntropyFit {
  EntropyModel model = EntropyModel::log;
  /// log: S = slope log ell + offset. linear-plus-log: S = slope ell / z* + offset, where the
  /// offset stands for b log z* + c (b and c are not separable at fixed z*).
  double slope = 0.0;
  double slope_error = 0.0;
  double offset = 0.0;
  double z_star = 0.0;
  /// slope / z* for the linear model: the entropy per site.
  double extensive = 0.0;
  double extensive_error = 0.0;
  double r2 = 0.0;
  double rms = 0.0;
  /// Akaike score n log(RSS / n) + 2k; lower is better.
  double aic = 0.0;
  std::vector<double> residuals;
};

/// Needs at least 4 samples; z* is required for the linear-plus-log model.
EntropyFit entropy_scaling_fit(const EntropyCurve& curve, EntropyModel model, double z_star = 0.0);

/// Minimal cone-respecting cut for a block.
///
/// A cut truncates the block's causal cone at some level q: it crosses the |S_q| cone bonds at
/// level q and every bond that leaves the truncated cone sideways below q. Bonds weigh log of
/// their dimension. At the cap the horizontal bonds weigh log chi for a mixed cap and 0 for a
/// product cap.
struct CutReport {
  double length = 0.0;
  int level = 0;
  /// Total weight of the cut through level q, for q = 0, 1, ...
  std::vector<double> by_level;
  /// Cone width at each level.
  std::vector<std::size_t> widths;
  /// Weight carried by each cone site at the cap (empty for scale-invariant networks).
  std::vector<double> cell_weights;
};

CutReport cut_length(const FiniteRangeMera& net, const std::vector<long>& block);
/// Scans cuts up to `max_level` levels above the physical sites.
CutReport cut_length(const ScaleInvariantMera& net, const std::vector<long>& block, int max_level = 32);

/// Columns ell,S,cap,network-id.
std::string to_csv(const EntropyCurve& curve);

}  // namespace holomera
