#include "holomera/mps.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

namespace holomera {

std::size_t Mps::bond_dimension() const {
  std::size_t d = 0;
  for (const auto& s : sites) d = std::max({d, s.dim(0), s.dim(2)});
  return d;
}

void Mps::validate() const {
  if (sites.empty()) throw InvalidArgument("mps: empty unit cell");
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const Tensor& a = sites[k];
    if (a.rank() != 3) throw InvalidArgument("mps: site tensors must have legs [left, phys, right]");
    if (a.dim(1) != sites.front().dim(1)) throw InvalidArgument("mps: physical dimension varies across the cell");
    if (a.dim(2) != sites[(k + 1) % sites.size()].dim(0)) throw InvalidArgument("mps: bond mismatch at site " + std::to_string(k));
    if (!a.all_finite()) throw NumericalError("mps: non-finite entries");
    if (!schmidt.empty() && schmidt[k].size() != a.dim(0)) throw InvalidArgument("mps: Schmidt data does not match bonds");
  }
  if (!schmidt.empty() && schmidt.size() != sites.size()) throw InvalidArgument("mps: Schmidt data does not match the cell");
}

namespace {

// Splits a right-canonical block with legs [l, p1, ..., pn, r] into n right-canonical sites,
// peeling from the right. With the left Schmidt values `lam` the SVDs give exact Schmidt values on
// the new bonds, which are returned in order. Values below `tol` relative to the largest are
// dropped; `discarded` records the largest dropped ratio.
std::vector<Tensor> split_canonical(Tensor t, const Eigen::VectorXd& lam, std::vector<Eigen::VectorXd>& bonds,
                                    double tol, double& discarded) {
  const std::size_t n = t.rank() - 2;
  std::vector<Tensor> out(n);
  bonds.assign(n - 1, Eigen::VectorXd());
  for (std::size_t k = n; k-- > 1;) {
    const std::size_t rows_legs = k + 1;  // l, p1..pk
    Matrix theta = t.as_matrix(rows_legs);
    const Matrix plain = theta;
    const Eigen::Index l = Eigen::Index(t.dim(0)), block = theta.rows() / l;
    for (Eigen::Index i = 0; i < l; ++i) theta.middleRows(i * block, block) *= lam(i);
    Eigen::BDCSVD<Matrix> svd(theta, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    Eigen::Index keep = 0;
    while (keep < sv.size() && sv(keep) > tol * sv(0)) ++keep;
    if (keep < sv.size()) discarded = std::max(discarded, sv(keep) / sv(0));
    const Matrix v = svd.matrixV().leftCols(keep);
    out[k] = Tensor::from_matrix(v.adjoint(), {std::size_t(keep), t.dim(k + 1), t.dim(k + 2)});
    bonds[k - 1] = sv.head(keep) / sv.head(keep).norm();
    Shape next(t.shape().begin(), t.shape().begin() + Eigen::Index(rows_legs));
    next.push_back(std::size_t(keep));
    t = Tensor::from_matrix(plain * v, next);
  }
  out[0] = t;
  return out;
}

Tensor two_site_gate(const Tensor& a, const Tensor& b, const Tensor& u) {
  const Tensor theta = contract(a, b, {{2, 0}});           // [l, s, t, r]
  const Tensor x = contract(u, theta, {{2, 1}, {3, 2}});   // [o1, o2, l, r]
  return permute(x, {2, 0, 1, 3});
}

// Left-to-right QR sweeps around the cell until the bond-0 Gram matrix stops changing.
// Returns C_k per bond with left Gram proportional to C_k^H C_k.
std::vector<Matrix> left_factors(const Mps& m) {
  const std::size_t n = m.cell(), d = m.phys_dim();
  std::vector<Matrix> c(n);
  Matrix cur = Matrix::Identity(Eigen::Index(m.bond(0)), Eigen::Index(m.bond(0)));
  Matrix prev_gram;
  for (int cycle = 0; cycle < 500; ++cycle) {
    for (std::size_t k = 0; k < n; ++k) {
      c[k] = cur;
      const Tensor& a = m.sites[k];
      const Matrix mk = cur * a.as_matrix(1);
      const Matrix g = Tensor::from_matrix(mk, {std::size_t(mk.rows()), d, a.dim(2)}).as_matrix(2);
      Eigen::HouseholderQR<Matrix> qr(g);
      const Eigen::Index r = std::min(g.rows(), g.cols());
      Matrix rf = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
      cur = rf / rf.norm();
    }
    Matrix gram = cur.adjoint() * cur;
    gram /= gram.trace();
    if (prev_gram.size() == gram.size() && (gram - prev_gram).cwiseAbs().maxCoeff() < 1e-14) break;
    prev_gram = gram;
  }
  return c;
}

// Right-to-left LQ sweeps; D_k per bond with right Gram proportional to D_k D_k^H.
std::vector<Matrix> right_factors(const Mps& m) {
  const std::size_t n = m.cell(), d = m.phys_dim();
  std::vector<Matrix> f(n);
  Matrix cur = Matrix::Identity(Eigen::Index(m.bond(0)), Eigen::Index(m.bond(0)));
  Matrix prev_gram;
  for (int cycle = 0; cycle < 500; ++cycle) {
    for (std::size_t k = n; k-- > 0;) {
      const Tensor& a = m.sites[k];
      const Matrix mk = a.as_matrix(2) * cur;
      const Matrix g = Tensor::from_matrix(mk, {a.dim(0), d, std::size_t(mk.cols())}).as_matrix(1);
      Eigen::HouseholderQR<Matrix> qr(g.adjoint());
      const Eigen::Index r = std::min(g.rows(), g.cols());
      Matrix rf = qr.matrixQR().topRows(r).triangularView<Eigen::Upper>();
      cur = rf.adjoint() / rf.norm();
      f[k] = cur;
    }
    Matrix gram = cur * cur.adjoint();
    gram /= gram.trace();
    if (prev_gram.size() == gram.size() && (gram - prev_gram).cwiseAbs().maxCoeff() < 1e-14) break;
    prev_gram = gram;
  }
  return f;
}

// Slice A^p as a (left x right) matrix.
Matrix slice(const Tensor& a, std::size_t p) {
  const std::size_t l = a.dim(0), d = a.dim(1), r = a.dim(2);
  Matrix s(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(r));
  for (std::size_t i = 0; i < l; ++i)
    for (std::size_t j = 0; j < r; ++j) s(Eigen::Index(i), Eigen::Index(j)) = a.data()[(i * d + p) * r + j];
  return s;
}

struct Slices {
  std::vector<std::vector<Matrix>> s;
  explicit Slices(const Mps& m) : s(m.cell()) {
    for (std::size_t k = 0; k < m.cell(); ++k)
      for (std::size_t p = 0; p < m.phys_dim(); ++p) s[k].push_back(slice(m.sites[k], p));
  }
  // L rows: bra bond, cols: ket bond.
  Matrix left(const Matrix& l, std::size_t k, const Matrix* op = nullptr) const {
    const auto& a = s[k % s.size()];
    Matrix out = Matrix::Zero(a[0].cols(), a[0].cols());
    for (std::size_t p = 0; p < a.size(); ++p)
      for (std::size_t q = 0; q < a.size(); ++q) {
        const Complex w = op ? (*op)(Eigen::Index(q), Eigen::Index(p)) : Complex(p == q ? 1.0 : 0.0);
        if (w != 0.0) out.noalias() += w * (a[q].adjoint() * l * a[p]);
      }
    return out;
  }
  // R rows: ket bond, cols: bra bond.
  Matrix right(const Matrix& r, std::size_t k) const {
    const auto& a = s[k % s.size()];
    Matrix out = Matrix::Zero(a[0].rows(), a[0].rows());
    for (const auto& ap : a) out.noalias() += ap * r * ap.adjoint();
    return out;
  }
};

struct FixedPoints {
  Matrix l, r;
};

FixedPoints fixed_points(const Mps& m, const Slices& sl) {
  const auto d0 = Eigen::Index(m.bond(0));
  if (!m.schmidt.empty()) {
    Matrix l = Matrix::Zero(d0, d0);
    for (Eigen::Index i = 0; i < d0; ++i) l(i, i) = m.schmidt[0][std::size_t(i)] * m.schmidt[0][std::size_t(i)];
    return {l / l.trace(), Matrix::Identity(d0, d0)};
  }
  Matrix l = Matrix::Identity(d0, d0), r = Matrix::Identity(d0, d0);
  for (int it = 0; it < 20000; ++it) {
    Matrix nl = l, nr = r;
    for (std::size_t k = 0; k < m.cell(); ++k) nl = sl.left(nl, k);
    for (std::size_t k = m.cell(); k-- > 0;) nr = sl.right(nr, k);
    nl /= nl.norm();
    nr /= nr.norm();
    const double diff = std::max((nl - l).cwiseAbs().maxCoeff(), (nr - r).cwiseAbs().maxCoeff());
    l = nl;
    r = nr;
    if (diff < 1e-14) break;
  }
  const Complex norm = (l * r).trace();
  if (std::abs(norm) < 1e-300) throw NumericalError("mps: transfer fixed points are orthogonal");
  return {l / norm, r};
}

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }

Complex expectation_of_ops(const Mps& m, const std::vector<std::pair<long, Matrix>>& ops) {
  const Slices sl(m);
  const FixedPoints fp = fixed_points(m, sl);
  const long cell = long(m.cell());
  const long start = floor_div(ops.front().first, cell) * cell;
  Matrix l = fp.l;
  long site = start;
  std::size_t next = 0;
  for (; next < ops.size(); ++site) {
    const Matrix* op = nullptr;
    Matrix combined;
    while (next < ops.size() && ops[next].first == site) {
      combined = op ? Matrix(combined * ops[next].second) : ops[next].second;
      op = &combined;
      ++next;
    }
    l = sl.left(l, std::size_t(site - start), op);
  }
  while ((site - start) % cell != 0) l = sl.left(l, std::size_t(site++ - start));
  return (l * fp.r).trace();
}

void check_operator(const Mps& m, const Matrix& a) {
  if (a.rows() != Eigen::Index(m.phys_dim()) || a.cols() != a.rows())
    throw InvalidArgument("mps: operator dimension mismatch");
}

}  // namespace

std::vector<std::vector<double>> schmidt_spectra(const Mps& m) {
  m.validate();
  if (!m.schmidt.empty()) return m.schmidt;
  const auto c = left_factors(m);
  const auto f = right_factors(m);
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < m.cell(); ++k) {
    Eigen::BDCSVD<Matrix> svd(c[k] * f[k]);
    const Eigen::VectorXd s = svd.singularValues() / svd.singularValues().norm();
    out.emplace_back(s.data(), s.data() + s.size());
  }
  return out;
}

MpsConversion to_mps(const FiniteRangeMera& net, double rank_tol) {
  if (net.cap.kind != CapKind::product)
    throw InvalidArgument("to_mps: only product-capped networks are pure states; use window_density for mixed caps");
  if (net.b != 3) throw InvalidArgument("to_mps: ternary networks only");
  if (net.depth() < 1) throw InvalidArgument("to_mps: network has no layers");

  MpsConversion out;
  const Vector v = net.cap.vector / net.cap.vector.norm();
  std::vector<Tensor> sites{Tensor(Shape{1, std::size_t(v.size()), 1}, std::vector<Complex>(v.data(), v.data() + v.size()))};
  std::vector<Eigen::VectorXd> lam{Eigen::VectorXd::Ones(1)};
  std::vector<Eigen::VectorXd> inner;
  for (int level = net.depth() - 1; level >= 0; --level) {
    const Layer& layer = net.layers[std::size_t(level)];
    std::vector<Tensor> fine;
    std::vector<Eigen::VectorXd> fine_lam;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      const Tensor t = permute(contract(sites[k], layer.w, {{1, 3}}), {0, 2, 3, 4, 1});
      auto parts = split_canonical(t, lam[k], inner, rank_tol, out.discarded);
      fine_lam.push_back(lam[k]);
      fine_lam.insert(fine_lam.end(), inner.begin(), inner.end());
      for (auto& p : parts) fine.push_back(std::move(p));
    }
    const std::size_t n = fine.size();
    for (std::size_t j = 0; j < n / 3; ++j) {
      const std::size_t i = 3 * j + 2, k = (3 * j + 3) % n;
      auto parts = split_canonical(two_site_gate(fine[i], fine[k], layer.u), fine_lam[i], inner, rank_tol, out.discarded);
      fine[i] = std::move(parts[0]);
      fine[k] = std::move(parts[1]);
      fine_lam[k] = inner[0];
    }
    sites = std::move(fine);
    lam = std::move(fine_lam);
  }

  out.mps.sites = std::move(sites);
  for (const auto& l : lam) out.mps.schmidt.emplace_back(l.data(), l.data() + l.size());
  out.bound = 1;
  for (int k = 0; k < net.depth(); ++k) out.bound *= std::size_t(net.chi);
  out.bound_satisfied = out.mps.bond_dimension() <= out.bound;
  return out;
}

PurifiedChain purified_chain(const FiniteRangeMera& net, double rank_tol) {
  if (net.b != 3) throw InvalidArgument("purified_chain: ternary networks only");
  if (net.depth() < 1) throw InvalidArgument("purified_chain: network has no layers");
  const std::size_t chi = std::size_t(net.chi);
  PurifiedChain out;
  out.cap = net.cap.kind;
  out.depth = net.depth();

  Tensor top;
  if (net.cap.kind == CapKind::product) {
    const Vector v = net.cap.vector / net.cap.vector.norm();
    top = Tensor(Shape{1, chi, 1, 1}, std::vector<Complex>(v.data(), v.data() + v.size()));
  } else {
    top = Tensor(Shape{1, chi, chi, 1});
    for (std::size_t p = 0; p < chi; ++p) top.at({0, p, p, 0}) = 1.0 / std::sqrt(double(chi));
  }
  std::vector<Tensor> sites{top};
  std::vector<Eigen::VectorXd> lam{Eigen::VectorXd::Ones(1)};
  std::vector<Eigen::VectorXd> inner;
  for (int level = net.depth() - 1; level >= 0; --level) {
    const Layer& layer = net.layers[std::size_t(level)];
    const std::size_t f = layer.chi_in();
    std::vector<Tensor> fine;
    std::vector<Eigen::VectorXd> fine_lam;
    for (std::size_t k = 0; k < sites.size(); ++k) {
      const std::size_t a = sites[k].dim(2);
      // [l, a, r, f0, f1, f2] -> [l, f0, (f1 a), f2, r]
      const Tensor t = permute(contract(sites[k], layer.w, {{1, 3}}), {0, 3, 4, 1, 5, 2});
      const Shape merged{t.dim(0), f, f * a, f, t.dim(5)};
      auto parts = split_canonical(t.reshaped(merged), lam[k], inner, rank_tol, out.discarded);
      fine_lam.push_back(lam[k]);
      fine_lam.insert(fine_lam.end(), inner.begin(), inner.end());
      for (std::size_t i = 0; i < 3; ++i) {
        const Tensor& q = parts[i];
        fine.push_back(q.reshaped({q.dim(0), f, i == 1 ? a : 1, q.dim(2)}));
      }
    }
    const std::size_t n = fine.size();
    for (std::size_t j = 0; j < n / 3; ++j) {
      const std::size_t i = 3 * j + 2, k = (3 * j + 3) % n;
      const Tensor& x = fine[i];
      const Tensor& y = fine[k];
      auto parts = split_canonical(two_site_gate(x.reshaped({x.dim(0), f, x.dim(3)}), y.reshaped({y.dim(0), f, y.dim(3)}), layer.u),
                                   fine_lam[i], inner, rank_tol, out.discarded);
      fine[i] = parts[0].reshaped({parts[0].dim(0), f, 1, parts[0].dim(2)});
      fine[k] = parts[1].reshaped({parts[1].dim(0), f, 1, parts[1].dim(2)});
      fine_lam[k] = inner[0];
    }
    sites = std::move(fine);
    lam = std::move(fine_lam);
  }
  out.sites = std::move(sites);
  for (const auto& l : lam) out.schmidt.emplace_back(l.data(), l.data() + l.size());
  return out;
}

TransferSpectrum transfer_spectrum(const Mps& m) {
  m.validate();
  const Slices sl(m);
  const auto d0 = Eigen::Index(m.bond(0));
  const Eigen::Index n = d0 * d0;
  auto apply = [&](const Vector& x) {
    Matrix l = Eigen::Map<const Matrix>(x.data(), d0, d0);
    for (std::size_t k = 0; k < m.cell(); ++k) l = sl.left(l, k);
    return Vector(Eigen::Map<const Vector>(l.data(), n));
  };

  std::vector<Complex> vals;
  if (n <= 1024) {
    Matrix e(n, n);
    for (Eigen::Index j = 0; j < n; ++j) e.col(j) = apply(Vector::Unit(n, j));
    Eigen::ComplexEigenSolver<Matrix> es(e, false);
    if (es.info() != Eigen::Success) throw NumericalError("transfer_spectrum: eigenvalue solver failed");
    for (Eigen::Index i = 0; i < n; ++i) vals.push_back(es.eigenvalues()(i));
  } else {
    // Arnoldi with full reorthogonalization; the two leading Ritz values are all that is needed.
    const Eigen::Index kdim = std::min<Eigen::Index>(n, 120);
    Matrix q = Matrix::Zero(n, kdim + 1), h = Matrix::Zero(kdim + 1, kdim);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> g;
    Vector v0(n);
    for (Eigen::Index i = 0; i < n; ++i) v0(i) = Complex(g(rng), g(rng));
    q.col(0) = v0 / v0.norm();
    Eigen::Index used = kdim;
    for (Eigen::Index j = 0; j < kdim; ++j) {
      Vector w = apply(q.col(j));
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i <= j; ++i) {
          const Complex c = q.col(i).dot(w);
          h(i, j) += c;
          w -= c * q.col(i);
        }
      h(j + 1, j) = w.norm();
      if (std::abs(h(j + 1, j)) < 1e-14) {
        used = j + 1;
        break;
      }
      q.col(j + 1) = w / h(j + 1, j).real();
    }
    Eigen::ComplexEigenSolver<Matrix> es(h.topLeftCorner(used, used), false);
    for (Eigen::Index i = 0; i < used; ++i) vals.push_back(es.eigenvalues()(i));
  }
  std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) { return std::abs(a) > std::abs(b); });

  TransferSpectrum t;
  t.cell = m.cell();
  t.t1 = vals[0];
  t.t2 = vals.size() > 1 ? vals[1] : Complex(0.0);
  if (std::abs(t.t2) < 1e-6 * std::abs(t.t1)) t.t2 = 0.0;
  const double ratio = std::abs(t.t2) / std::abs(t.t1);
  t.degenerate = ratio > 1.0 - 1e-8;
  // Zero eigenvalues of nilpotent blocks surface as roundoff of order eps^(1/m).
  t.xi = ratio < 1e-6 ? 0.0 : t.degenerate ? std::numeric_limits<double>::infinity() : -double(m.cell()) / std::log(ratio);
  return t;
}

Mps normalized(Mps m) {
  m.validate();
  if (!m.schmidt.empty()) return m;
  const Slices sl(m);
  const auto d0 = Eigen::Index(m.bond(0));
  Matrix l = Matrix::Identity(d0, d0);
  double growth = 1.0;
  for (int it = 0; it < 20000; ++it) {
    Matrix nl = l;
    for (std::size_t k = 0; k < m.cell(); ++k) nl = sl.left(nl, k);
    const double g = nl.norm() / l.norm();
    nl /= nl.norm();
    const double diff = (nl - l / l.norm()).cwiseAbs().maxCoeff();
    l = nl;
    const double prev = growth;
    growth = g;
    if (diff < 1e-15 || (it > 10 && std::abs(g - prev) < 1e-15 * g)) break;
  }
  const double scale = std::pow(growth, -0.5 / double(m.cell()));
  for (auto& s : m.sites) s = s.scaled(scale);
  return m;
}

Complex mps_expectation(const Mps& m, const Matrix& a, long x) {
  check_operator(m, a);
  return expectation_of_ops(m, {{x, a}});
}

Complex mps_correlator(const Mps& m, const Matrix& a, const Matrix& b, long x, long r) {
  check_operator(m, a);
  check_operator(m, b);
  if (r < 0) throw InvalidArgument("mps_correlator: separation must be non-negative");
  if (r == 0) return expectation_of_ops(m, {{x, a * b}});
  return expectation_of_ops(m, {{x, a}, {x + r, b}});
}

Complex mps_connected_correlator(const Mps& m, const Matrix& a, const Matrix& b, long x, long r) {
  return mps_correlator(m, a, b, x, r) - mps_expectation(m, a, x) * mps_expectation(m, b, x + r);
}

SiteDensity mps_window_density(const Mps& m, long first, int n) {
  if (n < 1) throw InvalidArgument("mps_window_density: need at least one site");
  m.validate();
  const Slices sl(m);
  const FixedPoints fp = fixed_points(m, sl);
  const long cell = long(m.cell());
  const std::size_t d = m.phys_dim();

  const long start = floor_div(first, cell) * cell;
  Matrix l = fp.l;
  for (long s = start; s < first; ++s) l = sl.left(l, std::size_t(s - start));
  const long stop = first + n;
  const long end = (floor_div(stop - 1, cell) + 1) * cell;
  Matrix r = fp.r;
  for (long s = end; s-- > stop;) r = sl.right(r, std::size_t(s - start));

  // L = X^H X splits the left environment into ket and bra halves.
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (l + l.adjoint()));
  const Eigen::VectorXd lam = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Matrix k = lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  std::size_t rows = std::size_t(k.rows());
  for (long s = first; s < stop; ++s) {
    const Tensor& a = m.sites[std::size_t(((s % cell) + cell) % cell)];
    const Matrix next = k * a.as_matrix(1);
    rows *= d;
    k = Tensor::from_matrix(next, {std::size_t(next.rows()), d, a.dim(2)}).as_matrix(2);
  }
  std::size_t window = 1;
  for (int i = 0; i < n; ++i) window *= d;
  const Eigen::Index g = Eigen::Index(rows / window);
  Matrix rho = Matrix::Zero(Eigen::Index(window), Eigen::Index(window));
  for (Eigen::Index gi = 0; gi < g; ++gi) {
    const auto blk = k.middleRows(gi * Eigen::Index(window), Eigen::Index(window));
    rho.noalias() += blk * r * blk.adjoint();
  }
  rho /= rho.trace();
  SiteDensity out;
  for (int i = 0; i < n; ++i) out.sites.push_back(first + i);
  out.rho = Tensor::from_matrix(rho, Shape(std::size_t(2 * n), d));
  return out;
}

double density_overlap(const Matrix& rho, const Matrix& sigma) {
  if (rho.rows() != sigma.rows() || rho.cols() != sigma.cols()) throw InvalidArgument("density_overlap: shape mismatch");
  const double rs = (rho * sigma).trace().real();
  const double rr = (rho * rho).trace().real(), ss = (sigma * sigma).trace().real();
  return rs / std::sqrt(rr * ss);
}

Mps random_mps(int bond, int phys, std::uint64_t seed) {
  if (bond < 1 || phys < 1) throw InvalidArgument("random_mps: dimensions must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Tensor a(Shape{std::size_t(bond), std::size_t(phys), std::size_t(bond)});
  for (auto& x : a.data()) {
    const double re = g(rng);
    x = Complex(re, g(rng));
  }
  Mps m;
  m.sites.push_back(a);
  return normalized(std::move(m));
}

}  // namespace holomera
