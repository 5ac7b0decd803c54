#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "holomera/linalg.hpp"
#include "holomera/tensor.hpp"

namespace holomera {

/// One coarse-graining step.
///
/// In the state (descending) direction a coarse site is expanded by `w` into b fine sites and
/// then `u` acts on the fine pair straddling neighbouring blocks, i.e. sites (b*j + b-1, b*j + b).
///   u: legs [out_left, out_right, in_left, in_right], every leg of dimension chi_in.
///   w: legs [fine_0, ..., fine_{b-1}, coarse], fine legs chi_in, coarse leg chi_out.
struct Layer {
  Tensor u;
  Tensor w;

  int branching() const { return int(w.rank()) - 1; }
  std::size_t chi_in() const { return w.dim(0); }
  std::size_t chi_out() const { return w.dim(w.rank() - 1); }
  Matrix u_matrix() const { return u.as_matrix(2); }
  Matrix w_matrix() const { return w.as_matrix(w.rank() - 1); }
};

/// max(|u^H u - 1|, |w^H w - 1|).
double layer_residual(const Layer& layer);

/// Throws InvalidArgument when shapes are inconsistent or the residual exceeds `tol`.
void validate_layer(const Layer& layer, double tol = 1e-12);

Layer make_layer(const Matrix& u, const Matrix& w, int b);
Layer random_layer(int chi_in, int chi_out, int b, std::uint64_t seed);

/// u = 1 and w embeds the coarse site on the centre fine site with the others in |0>.
Layer identity_layer(int chi, int b);

/// Scale-invariant network: `layer` repeats forever above the optional `transitional` layers.
/// transitional[0] acts directly on the physical sites.
struct ScaleInvariantMera {
  int chi = 2;
  int b = 3;
  Layer layer;
  std::vector<Layer> transitional;

  const Layer& layer_at(int level) const {
    return level < int(transitional.size()) ? transitional[std::size_t(level)] : layer;
  }
  std::size_t site_dim(int level) const { return layer_at(level).chi_in(); }
};

enum class CapKind { product, maximally_mixed };

std::string to_string(CapKind kind);
CapKind cap_kind_from_string(const std::string& s);

struct CapState {
  CapKind kind = CapKind::product;
  /// Single-site vector for the product cap; empty for the mixed cap.
  Vector vector;

  /// |0> of dimension chi.
  static CapState product(int chi);
  static CapState maximally_mixed();
  Matrix density(int chi) const;
};

/// Finite stack of layers below a cap; characteristic length xi = b^depth.
struct FiniteRangeMera {
  int chi = 2;
  int b = 3;
  std::vector<Layer> layers;
  CapState cap;

  int depth() const { return int(layers.size()); }
  long xi() const;
};

ScaleInvariantMera build_scale_invariant(int chi, int b, std::uint64_t seed);
ScaleInvariantMera make_scale_invariant(Layer layer, std::vector<Layer> transitional = {});
FiniteRangeMera build_finite_range(int chi, int b, int depth, const CapState& cap, std::uint64_t seed);
/// Every layer is a copy of the source's scale-invariant layer.
FiniteRangeMera build_finite_range(const ScaleInvariantMera& source, int depth, const CapState& cap);

/// w^H (1 x op x 1) w for ternary layers: the one-site operator on a block centre.
Matrix ascend_one_site(const Matrix& op, const Layer& layer);
/// Adjoint of ascend_one_site.
Matrix descend_one_site(const Matrix& rho, const Layer& layer);
/// Two-site ascending channel averaged over the three placements of a pair (ternary only).
Matrix ascend_two_site(const Matrix& op, const Layer& layer);
/// Adjoint of ascend_two_site.
Matrix descend_two_site(const Matrix& rho, const Layer& layer);

/// Tensors of the closed two-site network at one pair placement, in contraction order.
/// Placement p puts the pair on fine sites (p+1, p+2) below coarse sites 0 and 1.
enum class TwoSiteRole { rho = 0, w_left, w_right, w_left_conj, w_right_conj, u, u_conj, op };

/// Contracts the closed network Tr(op * descended rho) at `placement` with the `open` tensor removed.
/// The result has the legs of the removed tensor, so contracting it back against that tensor
/// reproduces the closed value.
Tensor two_site_environment(const Layer& layer, const Matrix& op, const Matrix& rho, int placement, TwoSiteRole open);

/// Validates a density (Hermitian, unit trace, PSD within 1e-10) and descends it through the
/// closed one- or two-site channel. Throws InvalidArgument for non-densities.
Matrix descend_density(const Matrix& rho, const Layer& layer);
void validate_density(const Matrix& rho, double tol = 1e-10);

/// Per-level supports of the causal cone. Element 0 is the input set.
std::vector<std::set<long>> causal_cone_sites(const std::set<long>& sites, int depth, int b);

/// First level at which the cones of two sites share a site; -1 if not within `max_depth`.
int cone_merge_level(long x, long y, int b, int max_depth = 64);

// -- exact reduced densities on arbitrary site sets -------------------------------------------

/// Reduced density on a sorted set of sites: legs are [ket per site..., bra per site...].
struct SiteDensity {
  std::vector<long> sites;
  Tensor rho;

  Matrix matrix() const { return rho.as_matrix(sites.size()); }
};

/// Fine sites whose disentanglers touch `sites` (the support just below the isometries).
std::vector<long> disentangler_support(const std::vector<long>& sites, int b);
/// Coarse sites whose isometries feed `fine`.
std::vector<long> coarse_support(const std::vector<long>& fine, int b);

SiteDensity trace_to(const SiteDensity& d, const std::vector<long>& keep);

/// Exact density on `target` one level below `coarse`, which must cover the required support.
SiteDensity descend_sites(const Layer& layer, const SiteDensity& coarse, const std::vector<long>& target);

/// Product of identical single-site densities.
SiteDensity product_density(const std::vector<long>& sites, const Matrix& single);

/// Exact reduced density of the capped network on level-0 `sites`.
SiteDensity window_density(const FiniteRangeMera& net, const std::vector<long>& sites);

/// Reduced density of a scale-invariant network, rooted in the fixed-point two-site density
/// `rho2` (position averaged) once the cone has shrunk to two adjacent sites above the
/// transitional layers.
SiteDensity window_density(const ScaleInvariantMera& net, const Matrix& rho2, const std::vector<long>& sites);

/// Expectation of a product of one-site operators placed on distinct sites.
Complex expectation(const SiteDensity& d, const std::vector<long>& sites, const std::vector<Matrix>& ops);

}  // namespace holomera
