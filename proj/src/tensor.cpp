#include "holomera/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace holomera {

namespace {

std::string shape_string(const Shape& s) {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < s.size(); ++i) os << (i ? "," : "") << s[i];
  os << ')';
  return os.str();
}

std::vector<std::size_t> strides_of(const Shape& shape) {
  std::vector<std::size_t> st(shape.size(), 1);
  for (std::size_t i = shape.size(); i-- > 1;) st[i - 1] = st[i] * shape[i];
  return st;
}

}  // namespace

std::size_t shape_volume(const Shape& shape) {
  std::size_t v = 1;
  for (auto d : shape) v *= d;
  return v;
}

Tensor::Tensor(Shape shape) : shape_(std::move(shape)) {
  for (auto d : shape_)
    if (d == 0) throw InvalidArgument("tensor legs must have positive dimension " + shape_string(shape_));
  data_.assign(shape_volume(shape_), Complex{0.0, 0.0});
}

Tensor::Tensor(Shape shape, std::vector<Complex> data) : shape_(std::move(shape)), data_(std::move(data)) {
  for (auto d : shape_)
    if (d == 0) throw InvalidArgument("tensor legs must have positive dimension " + shape_string(shape_));
  if (data_.size() != shape_volume(shape_))
    throw InvalidArgument("data length " + std::to_string(data_.size()) + " does not match shape " +
                          shape_string(shape_));
}

Tensor Tensor::from_matrix(const Matrix& m, Shape shape) {
  if (shape_volume(shape) != std::size_t(m.size()))
    throw InvalidArgument("matrix size does not match shape " + shape_string(shape));
  std::vector<Complex> data(m.size());
  Eigen::Map<RowMajorMatrix>(data.data(), m.rows(), m.cols()) = m;
  return Tensor(std::move(shape), std::move(data));
}

Tensor Tensor::scalar(Complex value) { return Tensor(Shape{}, {value}); }

Complex& Tensor::at(std::span<const std::size_t> index) {
  if (index.size() != shape_.size()) throw InvalidArgument("index rank mismatch");
  std::size_t off = 0;
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] >= shape_[i]) throw InvalidArgument("index out of range");
    off = off * shape_[i] + index[i];
  }
  return data_[off];
}

Complex Tensor::at(std::span<const std::size_t> index) const { return const_cast<Tensor*>(this)->at(index); }

Matrix Tensor::as_matrix(std::size_t row_legs) const {
  if (row_legs > shape_.size()) throw InvalidArgument("row leg count exceeds rank");
  std::size_t rows = 1;
  for (std::size_t i = 0; i < row_legs; ++i) rows *= shape_[i];
  const std::size_t cols = data_.size() / rows;
  return Eigen::Map<const RowMajorMatrix>(data_.data(), Eigen::Index(rows), Eigen::Index(cols));
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_volume(shape) != data_.size())
    throw InvalidArgument("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  return Tensor(std::move(shape), data_);
}

Tensor Tensor::conj() const {
  Tensor out = *this;
  for (auto& x : out.data_) x = std::conj(x);
  return out;
}

Tensor Tensor::scaled(Complex factor) const {
  Tensor out = *this;
  for (auto& x : out.data_) x *= factor;
  return out;
}

bool Tensor::is_real(double tol) const {
  return std::all_of(data_.begin(), data_.end(), [tol](Complex x) { return std::abs(x.imag()) < tol; });
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](Complex x) { return std::isfinite(x.real()) && std::isfinite(x.imag()); });
}

double Tensor::max_abs() const {
  double m = 0.0;
  for (auto x : data_) m = std::max(m, std::abs(x));
  return m;
}

double Tensor::norm() const {
  double s = 0.0;
  for (auto x : data_) s += std::norm(x);
  return std::sqrt(s);
}

Tensor& Tensor::operator+=(const Tensor& other) {
  if (other.shape_ != shape_) throw InvalidArgument("shape mismatch in addition");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator-=(const Tensor& other) {
  if (other.shape_ != shape_) throw InvalidArgument("shape mismatch in subtraction");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
  return *this;
}

Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
Tensor operator*(Complex s, const Tensor& a) { return a.scaled(s); }

Tensor permute(const Tensor& a, std::span<const std::size_t> order) {
  const std::size_t r = a.rank();
  if (order.size() != r) throw InvalidArgument("permutation length does not match tensor rank");
  std::vector<bool> seen(r, false);
  for (auto o : order) {
    if (o >= r || seen[o]) throw InvalidArgument("invalid permutation");
    seen[o] = true;
  }
  bool identity = true;
  for (std::size_t i = 0; i < r; ++i) identity &= order[i] == i;
  if (identity) return a;

  Shape out_shape(r);
  for (std::size_t i = 0; i < r; ++i) out_shape[i] = a.dim(order[i]);
  const auto in_strides = strides_of(a.shape());
  std::vector<std::size_t> src_stride(r);
  for (std::size_t i = 0; i < r; ++i) src_stride[i] = in_strides[order[i]];

  std::vector<Complex> out(a.size());
  const auto& in = a.data();
  // Innermost output leg is copied with a strided loop; outer legs use an odometer.
  const std::size_t inner = out_shape[r - 1];
  const std::size_t inner_stride = src_stride[r - 1];
  std::vector<std::size_t> idx(r, 0);
  std::size_t src = 0;
  for (std::size_t dst = 0; dst < out.size(); dst += inner) {
    for (std::size_t k = 0; k < inner; ++k) out[dst + k] = in[src + k * inner_stride];
    for (std::size_t leg = r - 1; leg-- > 0;) {
      ++idx[leg];
      src += src_stride[leg];
      if (idx[leg] < out_shape[leg]) break;
      src -= src_stride[leg] * out_shape[leg];
      idx[leg] = 0;
    }
  }
  return Tensor(std::move(out_shape), std::move(out));
}

Tensor permute(const Tensor& a, std::initializer_list<std::size_t> order) {
  return permute(a, std::span<const std::size_t>(order.begin(), order.size()));
}

Tensor contract(const Tensor& a, const Tensor& b, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<bool> used_a(a.rank(), false), used_b(b.rank(), false);
  for (auto [la, lb] : pairs) {
    if (la >= a.rank() || lb >= b.rank()) throw InvalidArgument("contracted leg out of range");
    if (used_a[la] || used_b[lb]) throw InvalidArgument("leg repeated in contraction pairs");
    used_a[la] = used_b[lb] = true;
    if (a.dim(la) != b.dim(lb))
      throw InvalidArgument("dimension mismatch on contracted legs: " + std::to_string(a.dim(la)) + " vs " +
                            std::to_string(b.dim(lb)));
  }
  std::vector<std::size_t> order_a, order_b;
  Shape out_shape;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!used_a[i]) {
      order_a.push_back(i);
      out_shape.push_back(a.dim(i));
    }
  const std::size_t free_a = order_a.size();
  for (auto [la, lb] : pairs) {
    order_a.push_back(la);
    order_b.push_back(lb);
  }
  for (std::size_t i = 0; i < b.rank(); ++i)
    if (!used_b[i]) {
      order_b.push_back(i);
      out_shape.push_back(b.dim(i));
    }

  const Tensor ap = permute(a, order_a);
  const Tensor bp = permute(b, order_b);
  std::size_t m = 1, k = 1;
  for (std::size_t i = 0; i < free_a; ++i) m *= ap.dim(i);
  for (std::size_t i = free_a; i < ap.rank(); ++i) k *= ap.dim(i);
  const std::size_t n = bp.size() / k;

  std::vector<Complex> out(m * n);
  Eigen::Map<const RowMajorMatrix> am(ap.data().data(), Eigen::Index(m), Eigen::Index(k));
  Eigen::Map<const RowMajorMatrix> bm(bp.data().data(), Eigen::Index(k), Eigen::Index(n));
  Eigen::Map<RowMajorMatrix> cm(out.data(), Eigen::Index(m), Eigen::Index(n));
  cm.noalias() = am * bm;
  return Tensor(std::move(out_shape), std::move(out));
}

Tensor contract(const Tensor& a, const Tensor& b, std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
  return contract(a, b, std::span<const std::pair<std::size_t, std::size_t>>(pairs.begin(), pairs.size()));
}

Tensor outer(const Tensor& a, const Tensor& b) { return contract(a, b, {}); }

Tensor partial_trace(const Tensor& a, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  std::vector<bool> used(a.rank(), false);
  std::vector<std::size_t> order, traced_first, traced_second;
  for (auto [x, y] : pairs) {
    if (x >= a.rank() || y >= a.rank() || x == y || used[x] || used[y])
      throw InvalidArgument("invalid trace pair");
    if (a.dim(x) != a.dim(y)) throw InvalidArgument("dimension mismatch on traced legs");
    used[x] = used[y] = true;
    traced_first.push_back(x);
    traced_second.push_back(y);
  }
  Shape out_shape;
  for (std::size_t i = 0; i < a.rank(); ++i)
    if (!used[i]) {
      order.push_back(i);
      out_shape.push_back(a.dim(i));
    }
  std::size_t t = 1;
  for (auto x : traced_first) t *= a.dim(x);
  order.insert(order.end(), traced_first.begin(), traced_first.end());
  order.insert(order.end(), traced_second.begin(), traced_second.end());
  const Tensor p = permute(a, order);
  const std::size_t m = p.size() / (t * t);
  std::vector<Complex> out(m, Complex{});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < t; ++j) out[i] += p.data()[i * t * t + j * t + j];
  return Tensor(std::move(out_shape), std::move(out));
}

Tensor ncon(const std::vector<const Tensor*>& tensors, const std::vector<std::vector<int>>& labels) {
  if (tensors.size() != labels.size() || tensors.empty()) throw InvalidArgument("ncon: tensor/label count mismatch");
  struct Node {
    Tensor t;
    std::vector<int> labels;
  };
  std::vector<Node> nodes;
  std::map<int, int> count;
  std::map<int, std::size_t> label_dim;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (labels[i].size() != tensors[i]->rank())
      throw InvalidArgument("ncon: label list " + std::to_string(i) + " does not match tensor rank");
    for (std::size_t l = 0; l < labels[i].size(); ++l) {
      const int lab = labels[i][l];
      if (lab == 0) throw InvalidArgument("ncon: label 0 is not allowed");
      ++count[lab];
      auto [it, inserted] = label_dim.emplace(lab, tensors[i]->dim(l));
      if (!inserted && it->second != tensors[i]->dim(l))
        throw InvalidArgument("ncon: dimension mismatch on label " + std::to_string(lab));
    }
    nodes.push_back({*tensors[i], labels[i]});
  }
  for (auto [lab, c] : count) {
    if (lab > 0 && c != 2) throw InvalidArgument("ncon: positive label " + std::to_string(lab) + " must appear twice");
    if (lab < 0 && c != 1) throw InvalidArgument("ncon: open label " + std::to_string(lab) + " must appear once");
  }

  // Self-traces first.
  for (auto& nd : nodes) {
    std::vector<std::pair<std::size_t, std::size_t>> tr;
    for (std::size_t i = 0; i < nd.labels.size(); ++i)
      for (std::size_t j = i + 1; j < nd.labels.size(); ++j)
        if (nd.labels[i] > 0 && nd.labels[i] == nd.labels[j]) tr.emplace_back(i, j);
    if (tr.empty()) continue;
    nd.t = partial_trace(nd.t, tr);
    std::vector<int> keep;
    for (std::size_t i = 0; i < nd.labels.size(); ++i) {
      bool traced = false;
      for (auto [x, y] : tr) traced |= (i == x || i == y);
      if (!traced) keep.push_back(nd.labels[i]);
    }
    nd.labels = keep;
  }

  auto merged_size = [&](const Node& a, const Node& b, bool& shares) {
    double size = 1.0;
    shares = false;
    for (int la : a.labels) {
      bool shared = std::find(b.labels.begin(), b.labels.end(), la) != b.labels.end();
      shares |= shared;
      if (!shared) size *= double(label_dim[la]);
    }
    for (int lb : b.labels)
      if (std::find(a.labels.begin(), a.labels.end(), lb) == a.labels.end()) size *= double(label_dim[lb]);
    return size;
  };

  while (nodes.size() > 1) {
    double best = std::numeric_limits<double>::infinity();
    std::size_t bi = 0, bj = 1;
    bool found_shared = false;
    for (std::size_t i = 0; i < nodes.size(); ++i)
      for (std::size_t j = i + 1; j < nodes.size(); ++j) {
        bool shares = false;
        const double s = merged_size(nodes[i], nodes[j], shares);
        if (shares && (!found_shared || s < best)) {
          best = s;
          bi = i;
          bj = j;
          found_shared = true;
        } else if (!found_shared && s < best) {
          best = s;
          bi = i;
          bj = j;
        }
      }
    Node& a = nodes[bi];
    Node& b = nodes[bj];
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::vector<int> out_labels;
    for (std::size_t i = 0; i < a.labels.size(); ++i) {
      auto it = std::find(b.labels.begin(), b.labels.end(), a.labels[i]);
      if (it != b.labels.end())
        pairs.emplace_back(i, std::size_t(it - b.labels.begin()));
      else
        out_labels.push_back(a.labels[i]);
    }
    for (int lb : b.labels)
      if (std::find(a.labels.begin(), a.labels.end(), lb) == a.labels.end()) out_labels.push_back(lb);
    Node merged{contract(a.t, b.t, pairs), out_labels};
    nodes.erase(nodes.begin() + std::ptrdiff_t(bj));
    nodes[bi] = std::move(merged);
  }

  Node& last = nodes.front();
  std::vector<std::size_t> order(last.labels.size());
  for (std::size_t i = 0; i < last.labels.size(); ++i) {
    const int lab = last.labels[i];
    if (lab > 0) throw InvalidArgument("ncon: unresolved positive label");
    if (std::size_t(-lab - 1) >= order.size()) throw InvalidArgument("ncon: open labels must be -1..-n");
    order[std::size_t(-lab - 1)] = i;
  }
  return permute(last.t, order);
}

}  // namespace holomera
