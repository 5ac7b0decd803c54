#pragma once

#include <cstdint>
#include <vector>

#include "holomera/tensor.hpp"

namespace holomera {

/// Eigen-data of a general square matrix with a biorthonormal dual basis.
///
/// Columns of `right` are right eigenvectors, columns of `left` satisfy left.adjoint() * right = 1,
/// so the input equals right * diag(eigenvalues) * left.adjoint().
struct SpectralDecomposition {
  Vector eigenvalues;
  Matrix right;
  Matrix left;
  /// Groups of indices whose eigenvalues lie within the cluster tolerance of each other.
  std::vector<std::vector<int>> clusters;
  /// max |left^H right - 1| after biorthonormalization.
  double biorthonormality_residual = 0.0;
  /// max |input - right diag(lambda) left^H|.
  double reconstruction_residual = 0.0;
  bool defective = false;
};

inline constexpr double kClusterTolerance = 1e-9;

/// Sorts by descending modulus, then descending real part, then descending imaginary part.
///
/// Throws NumericalError on QR non-convergence. A near-singular eigenvector matrix marks the
/// result defective instead of throwing; callers decide whether that is fatal.
SpectralDecomposition eig_general(const Matrix& m);

/// Eigenvalues of a Hermitian matrix in ascending order.
Eigen::VectorXd hermitian_eigenvalues(const Matrix& m);

/// Deterministic Haar-distributed isometry (rows >= cols) from a complex Gaussian matrix.
Matrix random_isometry(int rows, int cols, std::uint64_t seed);

struct PolarDecomposition {
  Matrix isometry;  ///< rows x cols with isometry^H isometry = 1
  Matrix positive;  ///< cols x cols Hermitian positive semidefinite
};

/// m = isometry * positive. Requires rows >= cols.
PolarDecomposition svd_polar(const Matrix& m);

/// max |m^H m - 1|.
double isometry_residual(const Matrix& m);

/// Entries of a * b^H summed, i.e. Tr(b^H a).
inline Complex hs_inner(const Matrix& b, const Matrix& a) { return (b.adjoint() * a).trace(); }

}  // namespace holomera
