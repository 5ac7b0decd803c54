#include "holomera/mera.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace holomera {

namespace {

long floor_div(long a, long b) { return a >= 0 ? a / b : -((-a + b - 1) / b); }
long floor_mod(long a, long b) { return a - b * floor_div(a, b); }

std::size_t ipow(std::size_t base, int e) {
  std::size_t r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

void require_ternary(const Layer& layer, const char* what) {
  if (layer.branching() != 3) throw InvalidArgument(std::string(what) + ": only ternary layers are supported");
}

void require_square(const Matrix& m, std::size_t dim, const char* what) {
  if (m.rows() != m.cols() || std::size_t(m.rows()) != dim)
    throw InvalidArgument(std::string(what) + ": expected a " + std::to_string(dim) + "x" + std::to_string(dim) +
                          " matrix, got " + std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
}

}  // namespace

// -- layers -------------------------------------------------------------------------------------

double layer_residual(const Layer& layer) {
  return std::max(isometry_residual(layer.u_matrix()), isometry_residual(layer.w_matrix()));
}

void validate_layer(const Layer& layer, double tol) {
  const int b = layer.branching();
  if (b != 2 && b != 3) throw InvalidArgument("layer: branching factor must be 2 or 3");
  const std::size_t chi = layer.chi_in();
  if (layer.u.rank() != 4) throw InvalidArgument("layer: u must have four legs");
  for (std::size_t k = 0; k < 4; ++k)
    if (layer.u.dim(k) != chi) throw InvalidArgument("layer: u legs must match the fine dimension");
  for (int k = 0; k < b; ++k)
    if (layer.w.dim(std::size_t(k)) != chi) throw InvalidArgument("layer: w fine legs must share one dimension");
  if (!layer.u.all_finite() || !layer.w.all_finite()) throw InvalidArgument("layer: non-finite entries");
  const double r = layer_residual(layer);
  if (!(r < tol)) throw InvalidArgument("layer: isometry residual " + std::to_string(r) + " exceeds tolerance");
}

Layer make_layer(const Matrix& u, const Matrix& w, int b) {
  if (b != 2 && b != 3) throw InvalidArgument("make_layer: branching factor must be 2 or 3");
  const auto chi = std::size_t(std::lround(std::sqrt(double(u.rows()))));
  if (chi * chi != std::size_t(u.rows()) || u.cols() != u.rows()) throw InvalidArgument("make_layer: u must be chi^2 x chi^2");
  if (std::size_t(w.rows()) != ipow(chi, b)) throw InvalidArgument("make_layer: w must have chi^b rows");
  Shape ws(std::size_t(b), chi);
  ws.push_back(std::size_t(w.cols()));
  Layer layer{Tensor::from_matrix(u, {chi, chi, chi, chi}), Tensor::from_matrix(w, ws)};
  validate_layer(layer);
  return layer;
}

Layer random_layer(int chi_in, int chi_out, int b, std::uint64_t seed) {
  if (chi_in < 1 || chi_out < 1) throw InvalidArgument("random_layer: dimensions must be positive");
  if (b != 2 && b != 3) throw InvalidArgument("random_layer: branching factor must be 2 or 3");
  const int n = chi_in * chi_in;
  const Matrix u = random_isometry(n, n, seed * 2654435761ULL + 1);
  const Matrix w = random_isometry(int(ipow(std::size_t(chi_in), b)), chi_out, seed * 2654435761ULL + 2);
  return make_layer(u, w, b);
}

Layer identity_layer(int chi, int b) {
  const int n = chi * chi;
  const auto rows = int(ipow(std::size_t(chi), b));
  Matrix w = Matrix::Zero(rows, chi);
  const int centre = (b - 1) / 2;
  const auto stride = int(ipow(std::size_t(chi), b - 1 - centre));
  for (int s = 0; s < chi; ++s) w(s * stride, s) = 1.0;
  return make_layer(Matrix::Identity(n, n), w, b);
}

// -- networks -----------------------------------------------------------------------------------

std::string to_string(CapKind kind) { return kind == CapKind::product ? "product" : "maximally-mixed"; }

CapKind cap_kind_from_string(const std::string& s) {
  if (s == "product") return CapKind::product;
  if (s == "maximally-mixed" || s == "mixed") return CapKind::maximally_mixed;
  throw InvalidArgument("unknown cap kind '" + s + "'");
}

CapState CapState::product(int chi) {
  CapState c;
  c.kind = CapKind::product;
  c.vector = Vector::Zero(chi);
  c.vector(0) = 1.0;
  return c;
}

CapState CapState::maximally_mixed() { return CapState{CapKind::maximally_mixed, Vector()}; }

Matrix CapState::density(int chi) const {
  if (kind == CapKind::maximally_mixed) return Matrix::Identity(chi, chi) / double(chi);
  if (vector.size() != chi) throw InvalidArgument("cap: vector dimension does not match chi");
  return vector * vector.adjoint();
}

long FiniteRangeMera::xi() const { return long(ipow(std::size_t(b), depth())); }

namespace {

void validate_cap(const CapState& cap, int chi) {
  if (cap.kind == CapKind::product) {
    if (cap.vector.size() != chi) throw InvalidArgument("cap: product vector must have dimension chi");
    if (std::abs(cap.vector.norm() - 1.0) > 1e-12) throw InvalidArgument("cap: product vector must have unit norm");
  }
}

}  // namespace

ScaleInvariantMera make_scale_invariant(Layer layer, std::vector<Layer> transitional) {
  validate_layer(layer);
  if (layer.chi_in() != layer.chi_out()) throw InvalidArgument("scale-invariant layer must preserve the bond dimension");
  for (std::size_t i = 0; i < transitional.size(); ++i) {
    validate_layer(transitional[i]);
    const std::size_t next = i + 1 < transitional.size() ? transitional[i + 1].chi_in() : layer.chi_in();
    if (transitional[i].chi_out() != next || transitional[i].branching() != layer.branching())
      throw InvalidArgument("transitional layers do not chain");
  }
  ScaleInvariantMera m;
  m.chi = int(layer.chi_in());
  m.b = layer.branching();
  m.layer = std::move(layer);
  m.transitional = std::move(transitional);
  return m;
}

ScaleInvariantMera build_scale_invariant(int chi, int b, std::uint64_t seed) {
  if (chi < 2) throw InvalidArgument("build_scale_invariant: chi must be at least 2");
  if (b != 2 && b != 3) throw InvalidArgument("build_scale_invariant: unsupported branching factor " + std::to_string(b));
  return make_scale_invariant(random_layer(chi, chi, b, seed));
}

FiniteRangeMera build_finite_range(int chi, int b, int depth, const CapState& cap, std::uint64_t seed) {
  if (depth < 1) throw InvalidArgument("build_finite_range: depth must be at least 1");
  const ScaleInvariantMera source = build_scale_invariant(chi, b, seed);
  return build_finite_range(source, depth, cap);
}

FiniteRangeMera build_finite_range(const ScaleInvariantMera& source, int depth, const CapState& cap) {
  if (depth < 1) throw InvalidArgument("build_finite_range: depth must be at least 1");
  if (!source.transitional.empty()) throw InvalidArgument("build_finite_range: source must not have transitional layers");
  validate_cap(cap, source.chi);
  FiniteRangeMera f;
  f.chi = source.chi;
  f.b = source.b;
  f.layers.assign(std::size_t(depth), source.layer);
  f.cap = cap;
  return f;
}

// -- closed channels ----------------------------------------------------------------------------

Matrix ascend_one_site(const Matrix& op, const Layer& layer) {
  require_ternary(layer, "ascend_one_site");
  require_square(op, layer.chi_in(), "ascend_one_site");
  const Tensor o = Tensor::from_matrix(op);
  const Tensor wc = layer.w.conj();
  return ncon({&wc, &o, &layer.w}, {{1, 2, 3, -1}, {2, 4}, {1, 4, 3, -2}}).as_matrix(1);
}

Matrix descend_one_site(const Matrix& rho, const Layer& layer) {
  require_ternary(layer, "descend_one_site");
  require_square(rho, layer.chi_out(), "descend_one_site");
  const Tensor r = Tensor::from_matrix(rho);
  const Tensor wc = layer.w.conj();
  return ncon({&layer.w, &r, &wc}, {{1, -1, 2, 3}, {3, 4}, {1, -2, 2, 4}}).as_matrix(1);
}

Matrix ascend_two_site(const Matrix& op, const Layer& layer) {
  require_ternary(layer, "ascend_two_site");
  const std::size_t d = layer.chi_in();
  require_square(op, d * d, "ascend_two_site");
  const std::size_t c = layer.chi_out();
  const Matrix rho_dummy = Matrix::Zero(Eigen::Index(c * c), Eigen::Index(c * c));
  Matrix acc = Matrix::Zero(Eigen::Index(c * c), Eigen::Index(c * c));
  for (int p = 0; p < 3; ++p)
    acc += two_site_environment(layer, op, rho_dummy, p, TwoSiteRole::rho).as_matrix(2).transpose();
  return acc / 3.0;
}

Matrix descend_two_site(const Matrix& rho, const Layer& layer) {
  require_ternary(layer, "descend_two_site");
  const std::size_t c = layer.chi_out();
  require_square(rho, c * c, "descend_two_site");
  const std::size_t d = layer.chi_in();
  const Matrix op_dummy = Matrix::Zero(Eigen::Index(d * d), Eigen::Index(d * d));
  Matrix acc = Matrix::Zero(Eigen::Index(d * d), Eigen::Index(d * d));
  for (int p = 0; p < 3; ++p)
    acc += two_site_environment(layer, op_dummy, rho, p, TwoSiteRole::op).as_matrix(2).transpose();
  return acc / 3.0;
}

void validate_density(const Matrix& rho, double tol) {
  if (rho.rows() != rho.cols()) throw InvalidArgument("density: matrix must be square");
  if (!rho.allFinite()) throw InvalidArgument("density: non-finite entries");
  if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > tol) throw InvalidArgument("density: not Hermitian");
  if (std::abs(rho.trace() - Complex(1.0)) > tol) throw InvalidArgument("density: trace is not 1");
  if (hermitian_eigenvalues(rho).minCoeff() < -tol) throw InvalidArgument("density: not positive semidefinite");
}

Matrix descend_density(const Matrix& rho, const Layer& layer) {
  validate_density(rho);
  require_ternary(layer, "descend_density");
  const auto c = Eigen::Index(layer.chi_out());
  if (rho.rows() == c) return descend_one_site(rho, layer);
  if (rho.rows() == c * c) return descend_two_site(rho, layer);
  throw InvalidArgument("descend_density: only one- and two-site densities are supported");
}

// -- two-site diagrams --------------------------------------------------------------------------

namespace {

// Ket-side labels: coarse s0, s1; fine outputs of the two isometries f0..f5; u outputs g2, g3.
// Bra-side copies are offset by 10 (and by 10 again for u outputs).
constexpr int kS0 = 1, kS1 = 2, kS0b = 3, kS1b = 4;
int fine_ket(int k) { return 10 + k; }
int fine_bra(int k) { return 20 + k; }
int site_ket(int k) { return k == 2 ? 32 : k == 3 ? 33 : fine_ket(k); }
int site_bra(int k) { return k == 2 ? 42 : k == 3 ? 43 : fine_bra(k); }

}  // namespace

Tensor two_site_environment(const Layer& layer, const Matrix& op, const Matrix& rho, int placement, TwoSiteRole open) {
  require_ternary(layer, "two_site_environment");
  if (placement < 0 || placement > 2) throw InvalidArgument("two_site_environment: placement must be 0, 1 or 2");
  const std::size_t d = layer.chi_in(), c = layer.chi_out();
  const int t1 = placement + 1, t2 = placement + 2;

  auto bra = [&](int k) { return (k == t1 || k == t2) ? site_bra(k) : site_ket(k); };
  // Sites 2 and 3 come out of u; others are isometry outputs directly.
  std::vector<int> w0{fine_ket(0), fine_ket(1), fine_ket(2), kS0};
  std::vector<int> w1{fine_ket(3), fine_ket(4), fine_ket(5), kS1};
  std::vector<int> w0c{bra(0), bra(1), fine_bra(2), kS0b};
  std::vector<int> w1c{fine_bra(3), bra(4), bra(5), kS1b};
  std::vector<int> uk{site_ket(2), site_ket(3), fine_ket(2), fine_ket(3)};
  std::vector<int> ub{bra(2), bra(3), fine_bra(2), fine_bra(3)};
  std::vector<int> rl{kS0, kS1, kS0b, kS1b};
  std::vector<int> hl{site_bra(t1), site_bra(t2), site_ket(t1), site_ket(t2)};

  const Tensor wc = layer.w.conj();
  const Tensor uc = layer.u.conj();
  const Tensor r = Tensor::from_matrix(rho, {c, c, c, c});
  const Tensor h = Tensor::from_matrix(op, {d, d, d, d});

  std::vector<const Tensor*> ts{&r, &layer.w, &layer.w, &wc, &wc, &layer.u, &uc, &h};
  std::vector<std::vector<int>> ls{rl, w0, w1, w0c, w1c, uk, ub, hl};
  const auto drop = std::size_t(open);
  std::map<int, int> relabel;
  for (std::size_t k = 0; k < ls[drop].size(); ++k) relabel[ls[drop][k]] = -int(k + 1);
  ts.erase(ts.begin() + long(drop));
  ls.erase(ls.begin() + long(drop));
  for (auto& l : ls)
    for (int& x : l)
      if (auto it = relabel.find(x); it != relabel.end()) x = it->second;
  return ncon(ts, ls);
}

// -- cones --------------------------------------------------------------------------------------

std::vector<long> disentangler_support(const std::vector<long>& sites, int b) {
  std::set<long> out;
  for (long s : sites) {
    out.insert(s);
    const long m = floor_mod(s, b);
    if (m == b - 1) out.insert(s + 1);
    if (m == 0) out.insert(s - 1);
  }
  return {out.begin(), out.end()};
}

std::vector<long> coarse_support(const std::vector<long>& fine, int b) {
  std::set<long> out;
  for (long s : fine) out.insert(floor_div(s, b));
  return {out.begin(), out.end()};
}

std::vector<std::set<long>> causal_cone_sites(const std::set<long>& sites, int depth, int b) {
  if (sites.empty()) throw InvalidArgument("causal_cone_sites: empty site set");
  if (b != 2 && b != 3) throw InvalidArgument("causal_cone_sites: branching factor must be 2 or 3");
  std::vector<std::set<long>> levels{sites};
  std::vector<long> cur(sites.begin(), sites.end());
  for (int k = 0; k < depth; ++k) {
    cur = coarse_support(disentangler_support(cur, b), b);
    levels.emplace_back(cur.begin(), cur.end());
  }
  return levels;
}

int cone_merge_level(long x, long y, int b, int max_depth) {
  std::vector<long> cx{x}, cy{y};
  for (int k = 1; k <= max_depth; ++k) {
    cx = coarse_support(disentangler_support(cx, b), b);
    cy = coarse_support(disentangler_support(cy, b), b);
    for (long s : cx)
      if (std::find(cy.begin(), cy.end(), s) != cy.end()) return k;
  }
  return -1;
}

// -- site-set densities -------------------------------------------------------------------------

namespace {

std::size_t index_of(const std::vector<long>& v, long x) {
  auto it = std::find(v.begin(), v.end(), x);
  if (it == v.end()) throw InvalidArgument("site " + std::to_string(x) + " is not in the support");
  return std::size_t(it - v.begin());
}

void require_sorted_unique(const std::vector<long>& v, const char* what) {
  if (v.empty()) throw InvalidArgument(std::string(what) + ": empty site set");
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] <= v[i - 1]) throw InvalidArgument(std::string(what) + ": sites must be sorted and distinct");
}

// Reorders a density whose ket legs carry `keys` so the sites come out sorted.
SiteDensity sorted_density(std::vector<long> keys, const Tensor& t) {
  const std::size_t n = keys.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<std::size_t> order;
  for (auto i : idx) order.push_back(i);
  for (auto i : idx) order.push_back(n + i);
  SiteDensity d;
  for (auto i : idx) d.sites.push_back(keys[i]);
  d.rho = permute(t, order);
  return d;
}

// Applies a two-site operator to ket legs (i, j) and its conjugate to the matching bra legs.
Tensor apply_pair(const Tensor& t, std::size_t n, std::size_t i, std::size_t j, const Tensor& u, const Tensor& uc) {
  auto apply_side = [&](const Tensor& in, const Tensor& op, std::size_t a, std::size_t b) {
    const Tensor x = contract(op, in, {{2, a}, {3, b}});
    // x legs: [o1, o2, remaining legs of `in` in order]; put o1 at a and o2 at b.
    std::vector<std::size_t> order(2 * n);
    std::size_t next = 2;
    for (std::size_t k = 0; k < 2 * n; ++k) {
      if (k == a) order[k] = 0;
      else if (k == b) order[k] = 1;
      else order[k] = next++;
    }
    return permute(x, order);
  };
  return apply_side(apply_side(t, u, i, j), uc, n + i, n + j);
}

// w contracted with conj(w) over the unused fine legs: [kept ket..., s, kept bra..., s'].
Tensor isometry_kernel(const Tensor& w, const Tensor& wc, const std::vector<int>& kept) {
  const int b = int(w.rank()) - 1;
  const int m = int(kept.size());
  std::vector<int> lk(std::size_t(b + 1)), lb(std::size_t(b + 1));
  for (int k = 0; k < b; ++k) {
    auto it = std::find(kept.begin(), kept.end(), k);
    if (it == kept.end()) {
      lk[std::size_t(k)] = lb[std::size_t(k)] = 100 + k;
    } else {
      const int pos = int(it - kept.begin());
      lk[std::size_t(k)] = -(pos + 1);
      lb[std::size_t(k)] = -(m + 2 + pos);
    }
  }
  lk[std::size_t(b)] = -(m + 1);
  lb[std::size_t(b)] = -(2 * m + 2);
  return ncon({&w, &wc}, {lk, lb});
}

}  // namespace

SiteDensity trace_to(const SiteDensity& d, const std::vector<long>& keep) {
  const std::size_t n = d.sites.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<long> kept;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::find(keep.begin(), keep.end(), d.sites[i]) == keep.end()) pairs.emplace_back(i, n + i);
    else kept.push_back(d.sites[i]);
  }
  for (long s : keep) index_of(d.sites, s);
  if (pairs.empty()) return d;
  if (kept.empty()) throw InvalidArgument("trace_to: nothing left to keep");
  return SiteDensity{kept, partial_trace(d.rho, pairs)};
}

SiteDensity descend_sites(const Layer& layer, const SiteDensity& coarse, const std::vector<long>& target) {
  require_sorted_unique(target, "descend_sites");
  const int b = layer.branching();
  const std::vector<long> pre = disentangler_support(target, b);
  const std::vector<long> need = coarse_support(pre, b);
  SiteDensity d = trace_to(coarse, need);

  const Tensor wc = layer.w.conj();
  std::vector<long> keys = d.sites;  // coarse ids until replaced by fine ids
  std::vector<bool> is_fine(keys.size(), false);
  Tensor t = d.rho;
  for (long c : need) {
    std::vector<int> kept;
    std::vector<long> fine_ids;
    for (int k = 0; k < b; ++k)
      if (std::binary_search(pre.begin(), pre.end(), b * c + k)) {
        kept.push_back(k);
        fine_ids.push_back(b * c + k);
      }
    const Tensor kern = isometry_kernel(layer.w, wc, kept);
    const std::size_t n = keys.size(), m = kept.size();
    std::size_t pos = 0;
    while (is_fine[pos] || keys[pos] != c) ++pos;
    const Tensor x = contract(kern, t, {{m, pos}, {2 * m + 1, n + pos}});
    // x legs: [kept ket (m), kept bra (m), ket rest (n-1), bra rest (n-1)].
    std::vector<std::size_t> order;
    for (std::size_t k = 0; k < n - 1; ++k) order.push_back(2 * m + k);
    for (std::size_t k = 0; k < m; ++k) order.push_back(k);
    for (std::size_t k = 0; k < n - 1; ++k) order.push_back(2 * m + n - 1 + k);
    for (std::size_t k = 0; k < m; ++k) order.push_back(m + k);
    t = permute(x, order);
    keys.erase(keys.begin() + long(pos));
    is_fine.erase(is_fine.begin() + long(pos));
    keys.insert(keys.end(), fine_ids.begin(), fine_ids.end());
    is_fine.insert(is_fine.end(), fine_ids.size(), true);
  }

  const Tensor uc = layer.u.conj();
  for (long s : pre) {
    if (floor_mod(s, b) != b - 1 || !std::binary_search(pre.begin(), pre.end(), s + 1)) continue;
    t = apply_pair(t, keys.size(), index_of(keys, s), index_of(keys, s + 1), layer.u, uc);
  }
  return trace_to(sorted_density(keys, t), target);
}

SiteDensity product_density(const std::vector<long>& sites, const Matrix& single) {
  require_sorted_unique(sites, "product_density");
  const auto d = std::size_t(single.rows());
  const Tensor one = Tensor::from_matrix(single, {d, d});
  Tensor t = one;
  for (std::size_t k = 1; k < sites.size(); ++k) t = outer(t, one);
  // outer gives [k0, b0, k1, b1, ...]; regroup kets first.
  const std::size_t n = sites.size();
  std::vector<std::size_t> order;
  for (std::size_t k = 0; k < n; ++k) order.push_back(2 * k);
  for (std::size_t k = 0; k < n; ++k) order.push_back(2 * k + 1);
  return SiteDensity{sites, permute(t, order)};
}

namespace {

// Support of `sites` at each level up to `levels` (element 0 is the input).
std::vector<std::vector<long>> cone_path(const std::vector<long>& sites, int b, int levels) {
  std::vector<std::vector<long>> path{sites};
  for (int k = 0; k < levels; ++k) path.push_back(coarse_support(disentangler_support(path.back(), b), b));
  return path;
}

}  // namespace

SiteDensity window_density(const FiniteRangeMera& net, const std::vector<long>& sites) {
  require_sorted_unique(sites, "window_density");
  const auto path = cone_path(sites, net.b, net.depth());
  SiteDensity d = product_density(path.back(), net.cap.density(net.chi));
  for (int lvl = net.depth() - 1; lvl >= 0; --lvl) d = descend_sites(net.layers[std::size_t(lvl)], d, path[std::size_t(lvl)]);
  return d;
}

SiteDensity window_density(const ScaleInvariantMera& net, const Matrix& rho2, const std::vector<long>& sites) {
  require_sorted_unique(sites, "window_density");
  const int top_min = int(net.transitional.size());
  std::vector<std::vector<long>> path{sites};
  auto small = [](const std::vector<long>& v) { return v.size() == 1 || (v.size() == 2 && v[1] == v[0] + 1); };
  while (int(path.size()) - 1 < top_min || !small(path.back())) {
    path.push_back(coarse_support(disentangler_support(path.back(), net.b), net.b));
    if (path.size() > 80) throw NumericalError("window_density: cone did not shrink");
  }
  const std::vector<long>& top = path.back();
  const auto c = std::size_t(net.site_dim(int(path.size()) - 1));
  if (std::size_t(rho2.rows()) != c * c) throw InvalidArgument("window_density: fixed-point density has wrong dimension");
  SiteDensity d{{top[0], top[0] + 1}, Tensor::from_matrix(rho2, {c, c, c, c})};
  d = trace_to(d, top);
  for (int lvl = int(path.size()) - 2; lvl >= 0; --lvl) d = descend_sites(net.layer_at(lvl), d, path[std::size_t(lvl)]);
  return d;
}

Complex expectation(const SiteDensity& d, const std::vector<long>& sites, const std::vector<Matrix>& ops) {
  if (sites.size() != ops.size()) throw InvalidArgument("expectation: one operator per site required");
  const SiteDensity r = trace_to(d, [&] {
    auto s = sites;
    std::sort(s.begin(), s.end());
    return s;
  }());
  Tensor t = r.rho;
  const std::size_t n = r.sites.size();
  // Apply each operator on its ket leg then close all legs.
  for (std::size_t k = 0; k < sites.size(); ++k) {
    const std::size_t pos = index_of(r.sites, sites[k]);
    const Tensor o = Tensor::from_matrix(ops[k]);
    if (o.dim(1) != t.dim(pos)) throw InvalidArgument("expectation: operator dimension mismatch");
    const Tensor x = contract(o, t, {{1, pos}});
    std::vector<std::size_t> order(2 * n);
    std::size_t next = 1;
    for (std::size_t j = 0; j < 2 * n; ++j) order[j] = j == pos ? 0 : next++;
    t = permute(x, order);
  }
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t k = 0; k < n; ++k) pairs.emplace_back(k, n + k);
  return partial_trace(t, pairs).data()[0];
}

}  // namespace holomera
