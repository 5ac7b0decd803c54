#pragma once

#include <cstdint>
#include <vector>

#include "holomera/mera.hpp"

namespace holomera {

/// Translation-invariant MPS with a periodic unit cell. Site tensors have legs [left, phys, right];
/// the right bond of the last site is the left bond of the first.
struct Mps {
  std::vector<Tensor> sites;
  /// Optional canonical data: when non-empty the sites are right-canonical and schmidt[k] holds
  /// the Schmidt coefficients on bond k.
  std::vector<std::vector<double>> schmidt;

  std::size_t cell() const { return sites.size(); }
  std::size_t phys_dim() const { return sites.front().dim(1); }
  /// Left bond of site k (bond 0 closes the cell).
  std::size_t bond(std::size_t k) const { return sites[k % cell()].dim(0); }
  std::size_t bond_dimension() const;
  void validate() const;
};

struct MpsConversion {
  Mps mps;
  /// chi^depth
  std::size_t bound = 0;
  bool bound_satisfied = false;
  /// Largest Schmidt value dropped as numerically zero, relative to the largest kept.
  double discarded = 0.0;
};

/// Exact conversion of a product-capped network, kept in canonical form layer by layer. Schmidt
/// values below `rank_tol` relative to the largest on a bond are dropped; nothing else is
/// truncated. Throws InvalidArgument for a mixed cap.
MpsConversion to_mps(const FiniteRangeMera& net, double rank_tol = 1e-13);

/// Canonical chain of a capped network with every cap site purified by an ancilla.
///
/// Site tensors have legs [left, phys, ancilla, right]. The ancilla of the cap site above cell m
/// rides on the centre site of that cell, so `sites[centre]` has ancilla dimension chi and every
/// other site has ancilla dimension 1. A product cap needs no ancilla and all ancilla legs are
/// trivial. Sites are right-canonical and schmidt[k] holds the Schmidt values on bond k.
struct PurifiedChain {
  std::vector<Tensor> sites;
  std::vector<std::vector<double>> schmidt;
  CapKind cap = CapKind::product;
  int depth = 0;
  double discarded = 0.0;

  std::size_t cell() const { return sites.size(); }
  std::size_t centre() const { return (sites.size() - 1) / 2; }
};

PurifiedChain purified_chain(const FiniteRangeMera& net, double rank_tol = 1e-13);

/// Bond-by-bond Schmidt coefficients of a (normalized) unit-cell MPS.
std::vector<std::vector<double>> schmidt_spectra(const Mps& m);

struct TransferSpectrum {
  Complex t1{0.0, 0.0};
  Complex t2{0.0, 0.0};
  /// Correlation length in sites, -cell / log|t2/t1|; 0 when t2 vanishes.
  double xi = 0.0;
  bool degenerate = false;
  std::size_t cell = 1;
};

/// Leading two eigenvalues of the unit-cell transfer matrix.
TransferSpectrum transfer_spectrum(const Mps& m);

/// Rescales every site so the dominant cell transfer eigenvalue is 1.
Mps normalized(Mps m);

/// <a(x) b(x + r)>, and the connected version, exactly from transfer-matrix products.
Complex mps_correlator(const Mps& m, const Matrix& a, const Matrix& b, long x, long r);
Complex mps_connected_correlator(const Mps& m, const Matrix& a, const Matrix& b, long x, long r);
Complex mps_expectation(const Mps& m, const Matrix& a, long x);

/// Reduced density on sites [first, first + n), legs [ket..., bra...].
SiteDensity mps_window_density(const Mps& m, long first, int n);

/// Tr(rho sigma) / sqrt(Tr rho^2 Tr sigma^2).
double density_overlap(const Matrix& rho, const Matrix& sigma);

/// Random translation-invariant MPS with one site tensor, normalized.
Mps random_mps(int bond, int phys, std::uint64_t seed);

}  // namespace holomera
