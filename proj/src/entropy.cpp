#include "holomera/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "holomera/linalg.hpp"

namespace holomera {

namespace {

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
long floor_mod(long a, long b) { return a - b * floor_div(a, b); }

std::vector<long> contiguous(long first, long ell) {
  std::vector<long> s(static_cast<std::size_t>(ell));
  std::iota(s.begin(), s.end(), first);
  return s;
}

std::size_t dense_dimension(std::size_t d, long ell) {
  std::size_t dim = 1;
  for (long i = 0; i < ell; ++i) {
    dim *= d;
    if (dim > kDenseBlockLimit) return dim;
  }
  return dim;
}

// Cut weights for the cone of `block` through `levels` layers. dims[k] is the bond dimension of
// level-k sites; top_weight, when set, replaces log dims[levels] for the horizontal cut at the top.
CutReport scan_cuts(const std::vector<long>& block, const std::vector<std::size_t>& dims, int levels, double top_weight,
                    bool has_top) {
  if (block.empty()) throw InvalidArgument("cut_length: empty block");
  std::set<long> s(block.begin(), block.end());
  if (s.size() != block.size()) throw InvalidArgument("cut_length: repeated sites in block");

  CutReport out;
  double side = 0.0;
  for (int k = 0;; ++k) {
    const bool top = has_top && k == levels;
    const double horizontal = double(s.size()) * (top ? top_weight : std::log(double(dims[std::size_t(k)])));
    out.by_level.push_back(side + horizontal);
    out.widths.push_back(s.size());
    if (k == levels) break;

    const double wk = std::log(double(dims[std::size_t(k)]));
    std::set<long> u;
    for (long x : s) {
      const long r = floor_mod(x, 3);
      if (r == 2) u.insert(floor_div(x, 3));
      if (r == 0) u.insert(floor_div(x, 3) - 1);
    }
    std::set<long> w;
    for (long j : u) {
      side += wk * double(!s.count(3 * j + 2) + !s.count(3 * j + 3));
      w.insert(j);
      w.insert(j + 1);
    }
    for (long x : s)
      if (floor_mod(x, 3) == 1) w.insert(floor_div(x, 3));
    for (long j : w) side += wk * double(!s.count(3 * j + 1) + !u.count(j) + !u.count(j - 1));
    s = std::move(w);
  }
  const auto best = std::min_element(out.by_level.begin(), out.by_level.end());
  out.length = *best;
  out.level = int(best - out.by_level.begin());
  if (has_top) out.cell_weights.assign(s.size(), top_weight);
  return out;
}

// Pure state on a set of sites plus one environment leg (always last). Tracing a site merges it
// into the environment, which is then compressed to at most the dimension of the kept sites, so
// the reduced density of the kept sites is unchanged while the tensor stays small.
struct PureBlock {
  Tensor psi;
  std::vector<long> keys;
  std::vector<bool> fine;

  std::size_t kept_dimension() const {
    std::size_t d = 1;
    for (std::size_t k = 0; k < keys.size(); ++k) d *= psi.dim(k);
    return d;
  }

  std::size_t position(long key, bool is_fine) const {
    for (std::size_t k = 0; k < keys.size(); ++k)
      if (keys[k] == key && fine[k] == is_fine) return k;
    throw InvalidArgument("block_entropy: internal site bookkeeping failed at " + std::to_string(key) + (is_fine ? "f" : "c"));
  }

  void compress() {
    const std::size_t rows = kept_dimension(), cols = psi.dim(keys.size());
    if (cols <= rows) return;
    const Matrix m = psi.as_matrix(keys.size());
    Eigen::HouseholderQR<Matrix> qr(m.adjoint());
    const Matrix r = qr.matrixQR().topRows(Eigen::Index(rows)).triangularView<Eigen::Upper>();
    Shape shape(psi.shape().begin(), psi.shape().end() - 1);
    shape.push_back(rows);
    psi = Tensor::from_matrix(r.adjoint(), shape);
  }

  void trace(std::size_t pos) {
    const std::size_t n = keys.size();
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < n; ++k)
      if (k != pos) order.push_back(k);
    order.push_back(n);
    order.push_back(pos);
    const Tensor t = permute(psi, order);
    Shape shape(t.shape().begin(), t.shape().end() - 2);
    shape.push_back(t.dim(n - 1) * t.dim(n));
    psi = t.reshaped(shape);
    keys.erase(keys.begin() + long(pos));
    fine.erase(fine.begin() + long(pos));
    compress();
  }

  // Replaces coarse site c by the three fine sites of its isometry.
  void expand(long c, const Tensor& w) {
    const std::size_t pos = position(c, false), n = keys.size();
    const Tensor t = contract(psi, w, {{pos, 3}});  // [other sites, env, f0, f1, f2]
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k + 1 < n; ++k) order.push_back(k);
    order.insert(order.end(), {n, n + 1, n + 2, n - 1});
    psi = permute(t, order);
    keys.erase(keys.begin() + long(pos));
    fine.erase(fine.begin() + long(pos));
    for (long k = 0; k < 3; ++k) {
      keys.push_back(3 * c + k);
      fine.push_back(true);
    }
  }

  void gate(long s, const Tensor& u) {
    const std::size_t a = position(s, true), b = position(s + 1, true);
    psi = contract(u, psi, {{2, a}, {3, b}});
    std::vector<long> k2{s, s + 1};
    std::vector<bool> f2{true, true};
    for (std::size_t k = 0; k < keys.size(); ++k)
      if (k != a && k != b) {
        k2.push_back(keys[k]);
        f2.push_back(fine[k]);
      }
    keys = std::move(k2);
    fine = std::move(f2);
  }
};

PureBlock purify(const Matrix& rho, const std::vector<long>& sites, const std::vector<std::size_t>& dims) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd& p = es.eigenvalues();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (p(i) > kEntropyFloor * p.maxCoeff()) keep.push_back(i);
  Matrix m(rho.rows(), Eigen::Index(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) m.col(Eigen::Index(j)) = es.eigenvectors().col(keep[j]) * std::sqrt(p(keep[j]));
  Shape shape(dims);
  shape.push_back(keep.size());
  return PureBlock{Tensor::from_matrix(m, shape), sites, std::vector<bool>(sites.size(), false)};
}

// Descends `block` (holding the coarse sites of the cone) through `layer` onto `target`.
void descend_pure(PureBlock& block, const Layer& layer, const std::vector<long>& target) {
  const std::vector<long> pre = disentangler_support(target, 3);
  const std::vector<long> need = coarse_support(pre, 3);
  auto in = [](const std::vector<long>& v, long x) { return std::binary_search(v.begin(), v.end(), x); };
  for (long c : need) {
    block.expand(c, layer.w);
    if (in(pre, 3 * c)) block.gate(3 * c - 1, layer.u);
    for (std::size_t k = 0; k < block.keys.size();) {
      const long s = block.keys[k];
      const bool done = block.fine[k] && s <= 3 * c + 1;
      if (block.fine[k] && (!in(pre, s) || (done && !in(target, s))))
        block.trace(k);
      else
        ++k;
    }
  }
  std::vector<std::size_t> order;
  for (long t : target) order.push_back(block.position(t, true));
  order.push_back(block.keys.size());
  block.psi = permute(block.psi, order);
  block.keys = target;
  block.fine.assign(target.size(), false);
}

double pure_block_entropy(const PureBlock& block) {
  const Matrix m = block.psi.as_matrix(block.keys.size());
  const Matrix g = m.rows() <= m.cols() ? Matrix(m * m.adjoint()) : Matrix(m.adjoint() * m);
  return von_neumann_entropy(g);
}

// Picks the cone level 1 <= q <= top whose reduced density is smallest.
struct ConePlan {
  std::vector<std::vector<long>> cone;
  int level = 1;
};

ConePlan plan_cone(long first, long ell, int top, const std::function<std::size_t(int)>& dim) {
  ConePlan plan;
  plan.cone.push_back(contiguous(first, ell));
  double best = 0.0;
  for (int k = 1; k <= top; ++k) {
    plan.cone.push_back(coarse_support(disentangler_support(plan.cone.back(), 3), 3));
    const double size = double(plan.cone.back().size()) * std::log(double(dim(k)));
    if (k == 1 || size < best - 1e-12) {
      best = size;
      plan.level = k;
    }
  }
  return plan;
}

double descend_and_measure(const ConePlan& plan, const Matrix& rho_top, const std::function<const Layer&(int)>& layer_at,
                           const std::function<std::size_t(int)>& dim) {
  const auto& top = plan.cone[std::size_t(plan.level)];
  PureBlock block = purify(rho_top, top, std::vector<std::size_t>(top.size(), dim(plan.level)));
  for (int k = plan.level - 1; k >= 0; --k) descend_pure(block, layer_at(k), plan.cone[std::size_t(k)]);
  return pure_block_entropy(block);
}

}  // namespace

void EntropyCurve::validate() const {
  if (ell.size() != entropy.size()) throw InvalidArgument("EntropyCurve: ell and entropy differ in length");
  for (std::size_t i = 0; i < ell.size(); ++i) {
    if (ell[i] < 0) throw InvalidArgument("EntropyCurve: negative block size");
    if (!std::isfinite(entropy[i]) || entropy[i] < 0.0) throw InvalidArgument("EntropyCurve: entropies must be finite and >= 0");
    if (ell[i] == 0 && entropy[i] != 0.0) throw InvalidArgument("EntropyCurve: empty block must have zero entropy");
  }
}

double entropy_of_spectrum(const Eigen::VectorXd& p) {
  double s = 0.0;
  for (double x : p)
    if (x >= kEntropyFloor) s -= x * std::log(x);
  return std::max(s, 0.0);
}

double von_neumann_entropy(const Matrix& rho) {
  const Eigen::VectorXd p = hermitian_eigenvalues(rho);
  return entropy_of_spectrum(p / p.sum());
}

double block_entropy(const ScaleInvariantMera& net, const Matrix& rho2, long ell, long first) {
  if (ell < 0) throw InvalidArgument("block_entropy: negative block size");
  if (ell == 0) return 0.0;
  if (dense_dimension(net.site_dim(0), ell) > kDenseBlockLimit)
    throw InvalidArgument("block_entropy: block of " + std::to_string(ell) +
                          " sites exceeds the dense budget and scale-invariant networks have no chain route");
  if (net.b != 3) throw InvalidArgument("block_entropy: ternary networks only");
  auto dim = [&](int k) { return net.site_dim(k); };
  // Stop where window_density roots the cone in rho2, so both routes describe the same state.
  int root = 0;
  for (std::vector<long> c = contiguous(first, ell);
       root < int(net.transitional.size()) || !(c.size() == 1 || (c.size() == 2 && c[1] == c[0] + 1)); ++root)
    c = coarse_support(disentangler_support(c, 3), 3);
  if (root == 0) return von_neumann_entropy(window_density(net, rho2, contiguous(first, ell)).matrix());
  const ConePlan plan = plan_cone(first, ell, root, dim);
  ScaleInvariantMera upper = net;
  upper.transitional.erase(upper.transitional.begin(),
                           upper.transitional.begin() + std::min<long>(plan.level, long(upper.transitional.size())));
  const auto& top = plan.cone[std::size_t(plan.level)];
  return descend_and_measure(plan, window_density(upper, rho2, top).matrix(),
                             [&](int k) -> const Layer& { return net.layer_at(k); }, dim);
}

double block_entropy(const FiniteRangeMera& net, long ell, long first) {
  if (ell < 0) throw InvalidArgument("block_entropy: negative block size");
  if (ell == 0) return 0.0;
  if (net.b != 3) throw InvalidArgument("block_entropy: ternary networks only");
  if (dense_dimension(net.layers.front().chi_in(), ell) > kDenseBlockLimit) return block_entropy(purified_chain(net), ell, first);
  auto dim = [&](int k) { return k < net.depth() ? net.layers[std::size_t(k)].chi_in() : net.layers.back().chi_out(); };
  const ConePlan plan = plan_cone(first, ell, net.depth(), dim);
  const auto& top = plan.cone[std::size_t(plan.level)];
  Matrix rho;
  if (plan.level == net.depth()) {
    rho = product_density(top, net.cap.density(int(dim(plan.level)))).matrix();
  } else {
    FiniteRangeMera upper = net;
    upper.layers.erase(upper.layers.begin(), upper.layers.begin() + plan.level);
    rho = window_density(upper, top).matrix();
  }
  return descend_and_measure(plan, rho, [&](int k) -> const Layer& { return net.layers[std::size_t(k)]; }, dim);
}

double block_entropy(const PurifiedChain& chain, long ell, long first) {
  if (ell < 0) throw InvalidArgument("block_entropy: negative block size");
  if (ell == 0) return 0.0;
  const long cell = long(chain.cell());
  const long stop = first + ell;

  const std::size_t k0 = std::size_t(floor_mod(first, cell));
  const std::size_t d0 = chain.sites[k0].dim(0);
  const auto& lam = chain.schmidt[k0];
  // Gram tensor of the block states, legs [env, bond, env', bond'].
  Tensor w(Shape{d0, d0, d0, d0});
  for (std::size_t a = 0; a < d0; ++a)
    for (std::size_t b = 0; b < d0; ++b) w.at({a, a, b, b}) = lam[a] * lam[b];

  int internal = 0;
  double log_anc = 0.0;
  for (long s = first; s < stop; ++s) {
    const Tensor& site = chain.sites[std::size_t(floor_mod(s, cell))];
    bool open = false;
    if (site.dim(2) > 1) {
      long lo = floor_div(s, cell), hi = lo;
      for (int k = 0; k < chain.depth; ++k) {
        lo = 3 * lo - 1;
        hi = 3 * hi + 3;
      }
      open = lo < first || hi >= stop;
      if (!open) {
        ++internal;
        log_anc = std::log(double(site.dim(2)));
      }
    }
    if (!open) {
      const Tensor b = site.reshaped({site.dim(0), site.dim(1) * site.dim(2), site.dim(3)});
      const Tensor t = contract(contract(w, b, {{3, 0}}), b.conj(), {{1, 0}, {3, 1}});  // [X, X', n', n]
      w = permute(t, {0, 3, 1, 2});
    } else {
      const Tensor t = contract(contract(w, site, {{3, 0}}), site.conj(), {{1, 0}, {3, 1}});  // [X, X', a', n', a, n]
      const Tensor p = permute(t, {0, 4, 5, 1, 2, 3});
      w = p.reshaped({p.dim(0) * p.dim(1), p.dim(2), p.dim(3) * p.dim(4), p.dim(5)});
    }
  }
  return von_neumann_entropy(w.as_matrix(2)) + internal * log_anc;
}

double block_entropy(const Vector& psi, std::size_t d, const std::vector<long>& block) {
  if (d < 2) throw InvalidArgument("block_entropy: site dimension must be at least 2");
  std::size_t n = 0, size = 1;
  while (size < std::size_t(psi.size())) {
    size *= d;
    ++n;
  }
  if (size != std::size_t(psi.size())) throw InvalidArgument("block_entropy: state size is not a power of the site dimension");
  std::set<long> in(block.begin(), block.end());
  if (in.size() != block.size()) throw InvalidArgument("block_entropy: repeated sites in block");
  for (long x : in)
    if (x < 0 || x >= long(n)) throw InvalidArgument("block_entropy: site outside the system");
  if (in.empty() || in.size() == n) return 0.0;

  std::vector<std::size_t> order(in.begin(), in.end());
  for (std::size_t x = 0; x < n; ++x)
    if (!in.count(long(x))) order.push_back(x);
  const Tensor t(Shape(n, d), std::vector<Complex>(psi.data(), psi.data() + psi.size()));
  const Matrix m = permute(t, order).as_matrix(in.size());
  Eigen::BDCSVD<Matrix> svd(m);
  const Eigen::VectorXd p = svd.singularValues().array().square();
  return entropy_of_spectrum(p / p.sum());
}

namespace {

template <typename F>
EntropyCurve averaged_curve(const std::vector<long>& ells, int offsets, F entropy) {
  if (offsets < 1) throw InvalidArgument("entropy_curve: offsets must be positive");
  EntropyCurve c;
  for (long ell : ells) {
    double sum = 0.0;
    for (int o = 0; o < offsets; ++o) sum += entropy(ell, long(o));
    c.ell.push_back(ell);
    c.entropy.push_back(ell == 0 ? 0.0 : sum / offsets);
  }
  return c;
}

}  // namespace

EntropyCurve entropy_curve(const ScaleInvariantMera& net, const Matrix& rho2, const std::vector<long>& ells, int offsets,
                           const std::string& id) {
  EntropyCurve c = averaged_curve(ells, offsets, [&](long ell, long o) { return block_entropy(net, rho2, ell, o); });
  c.network_id = id;
  c.cap = CapKind::product;
  return c;
}

EntropyCurve entropy_curve(const FiniteRangeMera& net, const std::vector<long>& ells, int offsets, const std::string& id) {
  bool need_chain = false;
  for (long ell : ells) need_chain |= dense_dimension(net.layers.front().chi_in(), ell) > kDenseBlockLimit;
  PurifiedChain chain;
  if (need_chain) chain = purified_chain(net);
  EntropyCurve c = averaged_curve(ells, offsets, [&](long ell, long o) {
    return need_chain ? block_entropy(chain, ell, o) : block_entropy(net, ell, o);
  });
  c.network_id = id;
  c.cap = net.cap.kind;
  return c;
}

std::string to_string(EntropyModel m) { return m == EntropyModel::log ? "log" : "linear-plus-log"; }

EntropyModel entropy_model_from_string(const std::string& s) {
  if (s == "log") return EntropyModel::log;
  if (s == "linear-plus-log") return EntropyModel::linear_plus_log;
  throw InvalidArgument("unknown entropy model '" + s + "'");
}

EntropyFit entropy_scaling_fit(const EntropyCurve& curve, EntropyModel model, double z_star) {
  curve.validate();
  if (curve.ell.size() < 4) throw InvalidArgument("entropy_scaling_fit: need at least 4 samples");
  if (model == EntropyModel::linear_plus_log && !(z_star > 0.0 && std::isfinite(z_star)))
    throw InvalidArgument("entropy_scaling_fit: linear-plus-log model needs a finite z* > 0");
  std::vector<double> x;
  for (long ell : curve.ell) {
    if (model == EntropyModel::log && ell < 1) throw InvalidArgument("entropy_scaling_fit: log model needs ell >= 1");
    x.push_back(model == EntropyModel::log ? std::log(double(ell)) : double(ell) / z_star);
  }
  const LineFit lf = fit_line(x, curve.entropy);
  EntropyFit f;
  f.model = model;
  f.slope = lf.slope;
  f.offset = lf.intercept;
  f.r2 = lf.r2;
  f.rms = lf.rms;
  const double n = double(x.size());
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / n;
  double sxx = 0.0, rss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = curve.entropy[i] - (lf.intercept + lf.slope * x[i]);
    f.residuals.push_back(r);
    rss += r * r;
    sxx += (x[i] - mean) * (x[i] - mean);
  }
  f.slope_error = sxx > 0.0 ? std::sqrt(rss / (n - 2.0) / sxx) : 0.0;
  f.aic = n * std::log(std::max(rss / n, 1e-300)) + 4.0;
  if (model == EntropyModel::linear_plus_log) {
    f.z_star = z_star;
    f.extensive = f.slope / z_star;
    f.extensive_error = f.slope_error / z_star;
  }
  return f;
}

CutReport cut_length(const FiniteRangeMera& net, const std::vector<long>& block) {
  if (net.b != 3) throw InvalidArgument("cut_length: ternary networks only");
  std::vector<std::size_t> dims;
  for (const auto& l : net.layers) dims.push_back(l.chi_in());
  dims.push_back(net.layers.back().chi_out());
  const double cap = net.cap.kind == CapKind::maximally_mixed ? std::log(double(dims.back())) : 0.0;
  return scan_cuts(block, dims, net.depth(), cap, true);
}

CutReport cut_length(const ScaleInvariantMera& net, const std::vector<long>& block, int max_level) {
  if (net.b != 3) throw InvalidArgument("cut_length: ternary networks only");
  if (max_level < 0) throw InvalidArgument("cut_length: max_level must be non-negative");
  std::vector<std::size_t> dims;
  for (int k = 0; k <= max_level; ++k) dims.push_back(net.site_dim(k));
  return scan_cuts(block, dims, max_level, 0.0, false);
}

std::string to_csv(const EntropyCurve& curve) {
  curve.validate();
  std::ostringstream os;
  os << std::setprecision(17) << "ell,S,cap,network-id\n";
  for (std::size_t i = 0; i < curve.ell.size(); ++i)
    os << curve.ell[i] << ',' << curve.entropy[i] << ',' << to_string(curve.cap) << ',' << curve.network_id << '\n';
  return os.str();
}

}  // namespace holomera
