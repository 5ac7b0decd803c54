#pragma once

// Exact diagonalization of periodic critical transverse-field Ising chains by Lanczos with full
// reorthogonalization, restricted to a Z2 parity sector. Used as an independent reference for
// energies and for scaling dimensions from finite-size gaps.

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

namespace holomera::testing {

class IsingChain {
 public:
  explicit IsingChain(int length, double g = 1.0) : l_(length), g_(g), dim_(std::size_t(1) << length) {}

  /// Lowest `count` eigenvalues of H = -sum (Z Z + g X) with periodic boundaries in the sector
  /// prod X = parity (+1 or -1).
  std::vector<double> lowest(int parity, int count, int krylov = 160) const {
    std::mt19937_64 rng(12345 + std::uint64_t(l_));
    std::normal_distribution<double> n01;
    Eigen::VectorXd v(dim_);
    for (auto& x : v) x = n01(rng);
    project(v, parity);
    v.normalize();
    const int m = std::min<int>(krylov, int(dim_ / 2));
    std::vector<Eigen::VectorXd> basis{v};
    std::vector<double> alpha, beta;
    Eigen::VectorXd w(dim_);
    for (int j = 0; j < m; ++j) {
      apply(basis[std::size_t(j)], w);
      const double a = w.dot(basis[std::size_t(j)]);
      alpha.push_back(a);
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : basis) w -= w.dot(q) * q;
      project(w, parity);
      const double b = w.norm();
      if (b < 1e-12 || j == m - 1) break;
      beta.push_back(b);
      basis.push_back(w / b);
    }
    const int k = int(alpha.size());
    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(k, k);
    for (int i = 0; i < k; ++i) {
      t(i, i) = alpha[std::size_t(i)];
      if (i + 1 < k) t(i, i + 1) = t(i + 1, i) = beta[std::size_t(i)];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(t, Eigen::EigenvaluesOnly);
    std::vector<double> out;
    for (int i = 0; i < count && i < k; ++i) out.push_back(es.eigenvalues()(i));
    return out;
  }

 private:
  void apply(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
    for (std::size_t s = 0; s < dim_; ++s) {
      double diag = 0.0;
      for (int i = 0; i < l_; ++i) {
        const int j = (i + 1) % l_;
        const bool zi = (s >> i) & 1u, zj = (s >> j) & 1u;
        diag -= (zi == zj) ? 1.0 : -1.0;
      }
      double acc = diag * in(Eigen::Index(s));
      for (int i = 0; i < l_; ++i) acc -= g_ * in(Eigen::Index(s ^ (std::size_t(1) << i)));
      out(Eigen::Index(s)) = acc;
    }
  }

  void project(Eigen::VectorXd& v, int parity) const {
    const std::size_t mask = dim_ - 1;
    for (std::size_t s = 0; s < dim_; ++s) {
      const std::size_t t = s ^ mask;
      if (t < s) continue;
      const double a = v(Eigen::Index(s)), b = v(Eigen::Index(t));
      const double sym = 0.5 * (a + parity * b);
      v(Eigen::Index(s)) = sym;
      v(Eigen::Index(t)) = parity * sym;
    }
  }

  int l_;
  double g_;
  std::size_t dim_;
};

struct IsingDimensions {
  double sigma = 0.0;
  double epsilon = 0.0;
  double ground_energy_per_site_16 = 0.0;
};

/// Delta_n(L) = L (E_n - E_0) / (2 pi v) with v = 2, extrapolated in 1/L^2 from the two largest
/// even lengths up to `max_length`.
inline IsingDimensions ising_dimensions_from_gaps(int max_length = 16) {
  std::vector<int> ls{max_length - 2, max_length};
  std::vector<double> sig, eps;
  IsingDimensions out;
  for (int l : ls) {
    const IsingChain chain(l);
    const auto even = chain.lowest(+1, 2);
    const auto odd = chain.lowest(-1, 1);
    const double scale = double(l) / (2.0 * std::numbers::pi * 2.0);
    sig.push_back(scale * (odd[0] - even[0]));
    eps.push_back(scale * (even[1] - even[0]));
    if (l == max_length) out.ground_energy_per_site_16 = even[0] / l;
  }
  auto extrap = [&](const std::vector<double>& d) {
    const double x1 = 1.0 / (ls[0] * ls[0]), x2 = 1.0 / (ls[1] * ls[1]);
    return (d[1] * x1 - d[0] * x2) / (x1 - x2);
  };
  out.sigma = extrap(sig);
  out.epsilon = extrap(eps);
  return out;
}

}  // namespace holomera::testing
