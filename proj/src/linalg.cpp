#include "holomera/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace holomera {

namespace {

bool finite_matrix(const Matrix& m) { return m.allFinite(); }

bool eigen_order(Complex a, Complex b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (std::abs(ma - mb) > 1e-14 * std::max(1.0, std::max(ma, mb))) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

}  // namespace

SpectralDecomposition eig_general(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("eig_general: matrix must be square");
  if (!finite_matrix(m)) throw NumericalError("eig_general: non-finite input");
  const Eigen::Index n = m.rows();

  Eigen::ComplexEigenSolver<Matrix> solver;
  solver.setMaxIterations(60 * n);
  solver.compute(m, true);
  if (solver.info() != Eigen::Success)
    throw NumericalError("eig_general: QR iteration did not converge within " +
                         std::to_string(solver.getMaxIterations()) + " iterations");

  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  const Vector& vals = solver.eigenvalues();
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) { return eigen_order(vals(a), vals(b)); });

  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.right.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = vals(idx[std::size_t(k)]);
    Vector v = solver.eigenvectors().col(idx[std::size_t(k)]);
    out.right.col(k) = v / v.norm();
  }

  // Dual basis from one joint linear solve; inside a degenerate cluster this picks the
  // biorthonormal combination automatically.
  Eigen::FullPivLU<Matrix> lu(out.right);
  const double rcond = lu.rcond();
  if (!lu.isInvertible() || rcond < 1e-13) {
    out.defective = true;
    out.left = Matrix::Zero(n, n);
  } else {
    out.left = lu.inverse().adjoint();
  }

  std::vector<bool> assigned(std::size_t(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (assigned[std::size_t(i)]) continue;
    std::vector<int> cluster{int(i)};
    assigned[std::size_t(i)] = true;
    for (Eigen::Index j = i + 1; j < n; ++j)
      if (!assigned[std::size_t(j)] && std::abs(out.eigenvalues(i) - out.eigenvalues(j)) < kClusterTolerance) {
        cluster.push_back(int(j));
        assigned[std::size_t(j)] = true;
      }
    if (cluster.size() > 1) out.clusters.push_back(cluster);
  }

  if (!out.defective) {
    out.biorthonormality_residual = (out.left.adjoint() * out.right - Matrix::Identity(n, n)).cwiseAbs().maxCoeff();
    const Matrix rebuilt = out.right * out.eigenvalues.asDiagonal() * out.left.adjoint();
    out.reconstruction_residual = (rebuilt - m).cwiseAbs().maxCoeff();
    if (out.biorthonormality_residual > 1e-6) out.defective = true;
  }
  return out;
}

Eigen::VectorXd hermitian_eigenvalues(const Matrix& m) {
  if (m.rows() != m.cols()) throw InvalidArgument("hermitian_eigenvalues: matrix must be square");
  const Matrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw NumericalError("hermitian_eigenvalues: no convergence");
  return solver.eigenvalues();
}

Matrix random_isometry(int rows, int cols, std::uint64_t seed) {
  if (cols < 1 || rows < cols)
    throw InvalidArgument("random_isometry: need rows >= cols >= 1, got " + std::to_string(rows) + "x" +
                          std::to_string(cols));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Matrix g(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      g(i, j) = Complex(re, im);
    }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix r = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  // Fixing the phases of diag(R) makes the distribution exactly Haar.
  for (int j = 0; j < cols; ++j) {
    const Complex d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

PolarDecomposition svd_polar(const Matrix& m) {
  if (m.rows() < m.cols()) throw InvalidArgument("svd_polar: need rows >= cols");
  if (!finite_matrix(m)) throw NumericalError("svd_polar: non-finite input");
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix& u = svd.matrixU();
  const Matrix& v = svd.matrixV();
  PolarDecomposition out;
  out.isometry = u * v.adjoint();
  out.positive = v * svd.singularValues().cast<Complex>().asDiagonal() * v.adjoint();
  return out;
}

double isometry_residual(const Matrix& m) {
  return (m.adjoint() * m - Matrix::Identity(m.cols(), m.cols())).cwiseAbs().maxCoeff();
}

}  // namespace holomera
