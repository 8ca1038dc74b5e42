#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnl {

using Shape = std::vector<std::size_t>;

std::string to_string(const Shape& shape);
std::size_t element_count(const Shape& shape);

class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws ShapeError naming both shapes when they differ.
void require_same_shape(const Shape& a, const Shape& b, const char* where);

/// Dense row-major array of doubles. Batched data keeps the sample index on
/// the last axis: a dense batch is (features, N), an image batch is
/// (rows, cols, channels, N).
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);
  Tensor(Shape shape, std::vector<double> values);

  static Tensor vector(std::initializer_list<double> values);
  static Tensor matrix(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor identity(std::size_t n);
  static Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }

  const Shape& shape() const { return shape_; }
  std::size_t rank() const { return shape_.size(); }
  std::size_t size() const { return data_.size(); }
  std::size_t extent(std::size_t axis) const;
  bool empty() const { return data_.empty(); }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }

  // Matrix access; rank must be 2.
  double& operator()(std::size_t i, std::size_t j) { return data_[i * shape_[1] + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * shape_[1] + j]; }

  double& at(std::initializer_list<std::size_t> index);
  double at(std::initializer_list<std::size_t> index) const;

  /// Same data under a new shape with an equal element count.
  Tensor reshaped(Shape shape) const;

  bool operator==(const Tensor& other) const = default;

 private:
  std::size_t offset(std::initializer_list<std::size_t> index) const;

  Shape shape_;
  std::vector<double> data_;
};

// Elementwise arithmetic.
Tensor hadamard(const Tensor& a, const Tensor& b);
Tensor add(const Tensor& a, const Tensor& b);
Tensor subtract(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double factor);
Tensor add_scalar(const Tensor& a, double c);
void add_into(Tensor& acc, const Tensor& b);            // acc += b
void axpy_into(Tensor& acc, double alpha, const Tensor& b);  // acc += alpha * b

// Linear algebra on rank-2 (and rank-1 for matvec) tensors.
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor matvec(const Tensor& a, const Tensor& x);
Tensor transpose(const Tensor& a);
double dot(const Tensor& a, const Tensor& b);

/// (n, N) + b broadcast over columns; b has n entries.
Tensor add_column(const Tensor& m, const Tensor& b);
/// Row sums of an (n, N) matrix, as a length-n vector.
Tensor sum_columns(const Tensor& m);
Tensor column(const Tensor& m, std::size_t j);
void set_column(Tensor& m, std::size_t j, const Tensor& v);

// Reductions, all accumulated left to right.
double sum(const Tensor& a);
double mean(const Tensor& a);
double max(const Tensor& a);
/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(const Tensor& a);
std::size_t argmax(std::span<const double> values);
double l2_norm(const Tensor& a);
bool all_finite(const Tensor& a);

// Windowed operations on matrices.

struct ConvGeometry {
  std::size_t kernel = 1;  // m, the kernel is m x m
  std::size_t stride = 1;  // s >= 1
  std::size_t padding = 0; // p >= 0

  bool operator==(const ConvGeometry&) const = default;
};

struct OutShape {
  std::size_t rows = 0;
  std::size_t cols = 0;
  /// Set when (n + 2p - m) is not a multiple of s; the ragged edge is dropped.
  bool inexact = false;
};

/// (floor((n1 + 2p - m) / s) + 1, floor((n2 + 2p - m) / s) + 1).
OutShape out_shape(std::size_t n1, std::size_t n2, const ConvGeometry& geom);

/// Zero border of width p around the first two axes; trailing axes untouched.
Tensor pad_zero(const Tensor& y, std::size_t p);

/// Row- and column-reversed copy of a matrix.
Tensor flip(const Tensor& k);

/// [Y (*) K]_{i,j} = sum_{k,l} K_{k,l} Y_{i s + k, j s + l} over the padded input
/// (0-based). The kernel must be square; its extent has to match geom.kernel.
Tensor cross_correlate(const Tensor& y, const Tensor& k, const ConvGeometry& geom);
Tensor cross_correlate(const Tensor& y, const Tensor& k, std::size_t stride = 1,
                       std::size_t padding = 0);

/// [Y * K]_{i,j} = sum_{k,l} K_{k,l} Y_{i s + m-1-k, j s + m-1-l}, the true
/// convolution with a flipped kernel.
Tensor convolve(const Tensor& y, const Tensor& k, const ConvGeometry& geom);
Tensor convolve(const Tensor& y, const Tensor& k, std::size_t stride = 1,
                std::size_t padding = 0);

}  // namespace nnl
