#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace holomera {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Shape = std::vector<std::size_t>;

/// Raised for malformed inputs: shape mismatches, bad permutations, invalid parameters.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine fails (non-convergence, defective spectra, non-finite data).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Dense multi-leg array of complex doubles in row-major order.
///
/// Leg 0 is the slowest-varying index. A rank-0 tensor holds one scalar.
class Tensor {
 public:
  Tensor() : data_(1, Complex{0.0, 0.0}) {}
  explicit Tensor(Shape shape);
  Tensor(Shape shape, std::vector<Complex> data);

  /// Copies `m` into a tensor of the given shape; the product of `shape` must equal m.size().
  static Tensor from_matrix(const Matrix& m, Shape shape);
  static Tensor from_matrix(const Matrix& m) { return from_matrix(m, {std::size_t(m.rows()), std::size_t(m.cols())}); }
  static Tensor scalar(Complex value);

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t dim(std::size_t leg) const { return shape_.at(leg); }

  const std::vector<Complex>& data() const { return data_; }
  std::vector<Complex>& data() { return data_; }

  Complex& at(std::span<const std::size_t> index);
  Complex at(std::span<const std::size_t> index) const;
  Complex& at(std::initializer_list<std::size_t> index) { return at(std::span<const std::size_t>(index.begin(), index.size())); }
  Complex at(std::initializer_list<std::size_t> index) const {
    return at(std::span<const std::size_t>(index.begin(), index.size()));
  }

  /// Groups the first `row_legs` legs into rows and the remaining legs into columns.
  Matrix as_matrix(std::size_t row_legs) const;
  Tensor reshaped(Shape shape) const;
  Tensor conj() const;
  Tensor scaled(Complex factor) const;

  /// True when every imaginary part is below `tol` in magnitude.
  bool is_real(double tol = 1e-10) const;
  bool all_finite() const;
  double max_abs() const;
  double norm() const;

  Tensor& operator+=(const Tensor& other);
  Tensor& operator-=(const Tensor& other);

 private:
  Shape shape_;
  std::vector<Complex> data_;
};

Tensor operator+(Tensor a, const Tensor& b);
Tensor operator-(Tensor a, const Tensor& b);
Tensor operator*(Complex s, const Tensor& a);

std::size_t shape_volume(const Shape& shape);

/// Sums over the paired legs; result legs are the unpaired legs of `a` followed by those of `b`.
Tensor contract(const Tensor& a, const Tensor& b, std::span<const std::pair<std::size_t, std::size_t>> pairs);
Tensor contract(const Tensor& a, const Tensor& b, std::initializer_list<std::pair<std::size_t, std::size_t>> pairs);

/// Result leg k is input leg order[k].
Tensor permute(const Tensor& a, std::span<const std::size_t> order);
Tensor permute(const Tensor& a, std::initializer_list<std::size_t> order);

/// Traces leg pairs of a single tensor.
Tensor partial_trace(const Tensor& a, std::span<const std::pair<std::size_t, std::size_t>> pairs);

/// Outer product; legs of `a` then legs of `b`.
Tensor outer(const Tensor& a, const Tensor& b);

/// Network contraction with integer labels.
///
/// Positive labels are summed and must appear exactly twice; negative labels stay open and are
/// ordered -1, -2, ... in the result. Pairwise contractions are chosen greedily by smallest
/// intermediate size.
Tensor ncon(const std::vector<const Tensor*>& tensors, const std::vector<std::vector<int>>& labels);

}  // namespace holomera
