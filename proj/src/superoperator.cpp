#include "holomera/superoperator.hpp"

#include <cmath>
#include <numbers>

namespace holomera {

Vector vectorize(const Matrix& op) {
  Vector v(op.size());
  for (Eigen::Index i = 0; i < op.rows(); ++i)
    for (Eigen::Index j = 0; j < op.cols(); ++j) v(i * op.cols() + j) = op(i, j);
  return v;
}

Matrix unvectorize(const Vector& v, int chi) {
  if (v.size() != Eigen::Index(chi) * chi) throw InvalidArgument("unvectorize: length is not chi^2");
  Matrix m(chi, chi);
  for (int i = 0; i < chi; ++i)
    for (int j = 0; j < chi; ++j) m(i, j) = v(i * chi + j);
  return m;
}

double scaling_dimension(Complex lambda, int b) { return -std::log(std::abs(lambda)) / std::log(double(b)); }

ScalingSuperoperator build_scaling_superoperator(const Layer& layer) {
  validate_layer(layer);
  if (layer.branching() != 3) throw InvalidArgument("scaling superoperator: only ternary networks are supported");
  if (layer.chi_in() != layer.chi_out()) throw InvalidArgument("scaling superoperator: layer must preserve chi");
  const int chi = int(layer.chi_in());
  ScalingSuperoperator s;
  s.b = 3;
  s.chi = chi;
  s.matrix.resize(chi * chi, chi * chi);
  for (int i = 0; i < chi; ++i)
    for (int j = 0; j < chi; ++j) {
      Matrix e = Matrix::Zero(chi, chi);
      e(i, j) = 1.0;
      s.matrix.col(i * chi + j) = vectorize(ascend_one_site(e, layer));
    }
  return s;
}

ScalingSuperoperator build_scaling_superoperator(const ScaleInvariantMera& mera) {
  return build_scaling_superoperator(mera.layer);
}

Matrix apply_superoperator(const ScalingSuperoperator& s, const Matrix& op) {
  if (op.rows() != s.chi || op.cols() != s.chi) throw InvalidArgument("apply_superoperator: operator dimension mismatch");
  return unvectorize(s.matrix * vectorize(op), s.chi);
}

Matrix apply_n_times(const ScalingSuperoperator& s, const Matrix& op, int n) {
  if (n < 0) throw InvalidArgument("apply_n_times: n must be non-negative");
  if (op.rows() != s.chi || op.cols() != s.chi) throw InvalidArgument("apply_n_times: operator dimension mismatch");
  Vector v = vectorize(op);
  for (int k = 0; k < n; ++k) v = s.matrix * v;
  return unvectorize(v, s.chi);
}

ScalingOperatorSet spectral_decompose(const ScalingSuperoperator& s) {
  const SpectralDecomposition eig = eig_general(s.matrix);
  ScalingOperatorSet out;
  out.b = s.b;
  out.eigenvalues = eig.eigenvalues;
  out.clusters = eig.clusters;
  out.defective = eig.defective;
  const Eigen::Index n = eig.eigenvalues.size();
  for (Eigen::Index k = 0; k < n; ++k) {
    const Complex lam = eig.eigenvalues(k);
    Vector r = eig.right.col(k);
    Vector l = eig.defective ? Vector(r) : Vector(eig.left.col(k));
    const bool real = std::abs(lam.imag()) < 1e-10;
    Complex c = 1.0 / r.norm();
    if (real) {
      // phi = e^{i theta} H with H Hermitian; Tr(phi phi) = e^{2 i theta} Tr(H^2) fixes theta.
      const Matrix phi = unvectorize(r * c, s.chi);
      const Complex tr = (phi * phi).trace();
      if (std::abs(tr) > 1e-12) c *= std::polar(1.0, -std::arg(tr) / 2.0);
      // Remaining sign: positive trace, or a positive largest entry for traceless operators.
      const Vector v = r * c;
      const Complex t = unvectorize(v, s.chi).trace();
      Eigen::Index i = 0;
      v.cwiseAbs().maxCoeff(&i);
      const double key = std::abs(t) > 1e-10 ? t.real() : v(i).real();
      if (key < 0) c = -c;
    }
    r *= c;
    l /= std::conj(c);
    out.operators.push_back(unvectorize(r, s.chi));
    out.duals.push_back(unvectorize(l, s.chi));
    out.real.push_back(real);
    out.dimensions.push_back(scaling_dimension(lam, s.b));
    out.phases.push_back(std::arg(lam));
    out.eigen_residual =
        std::max(out.eigen_residual, (apply_superoperator(s, out.operators.back()) - lam * out.operators.back()).norm());
  }
  if (!eig.defective) {
    double res = 0.0;
    for (Eigen::Index a = 0; a < n; ++a)
      for (Eigen::Index b = 0; b < n; ++b) {
        const Complex ip = hs_inner(out.duals[std::size_t(a)], out.operators[std::size_t(b)]);
        res = std::max(res, std::abs(ip - (a == b ? 1.0 : 0.0)));
      }
    out.biorthonormality_residual = res;
  } else {
    out.biorthonormality_residual = std::numeric_limits<double>::infinity();
  }
  return out;
}

int ScalingOperatorSet::first_real_nontrivial() const {
  for (std::size_t k = 1; k < size(); ++k)
    if (real[k] && std::abs(eigenvalues(Eigen::Index(k))) > 1e-12) return int(k);
  return -1;
}

}  // namespace holomera
