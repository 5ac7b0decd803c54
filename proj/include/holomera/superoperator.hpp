#pragma once

#include <vector>

#include "holomera/linalg.hpp"
#include "holomera/mera.hpp"

namespace holomera {

/// Matrix of O -> ascend_one_site(O) on row-major vectorized operators: vec(O)[i*chi + j] = O(i, j).
struct ScalingSuperoperator {
  Matrix matrix;
  int b = 3;
  int chi = 2;
};

/// Eigen-data of the scaling superoperator in descending |lambda| (non-decreasing Delta).
///
/// `operators` are right eigen-operators with unit Hilbert-Schmidt norm; `duals` satisfy
/// Tr(duals[a]^H operators[b]) = delta_ab. Operators with real eigenvalues are made Hermitian
/// by a global phase.
struct ScalingOperatorSet {
  Vector eigenvalues;
  std::vector<double> dimensions;
  std::vector<double> phases;
  std::vector<Matrix> operators;
  std::vector<Matrix> duals;
  std::vector<bool> real;
  std::vector<std::vector<int>> clusters;
  double biorthonormality_residual = 0.0;
  double eigen_residual = 0.0;
  bool defective = false;
  int b = 3;

  std::size_t size() const { return operators.size(); }
  /// Index of the first non-identity operator with a real eigenvalue, or -1.
  int first_real_nontrivial() const;
};

Vector vectorize(const Matrix& op);
Matrix unvectorize(const Vector& v, int chi);

ScalingSuperoperator build_scaling_superoperator(const ScaleInvariantMera& mera);
ScalingSuperoperator build_scaling_superoperator(const Layer& layer);
ScalingOperatorSet spectral_decompose(const ScalingSuperoperator& s);
Matrix apply_superoperator(const ScalingSuperoperator& s, const Matrix& op);
Matrix apply_n_times(const ScalingSuperoperator& s, const Matrix& op, int n);

/// -log_b |lambda|.
double scaling_dimension(Complex lambda, int b);

}  // namespace holomera
