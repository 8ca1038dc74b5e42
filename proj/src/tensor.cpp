#include "nnl/tensor.hpp"

#include <cmath>
#include <sstream>

namespace nnl {

std::string to_string(const Shape& shape) {
  std::ostringstream out;
  out << '(';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) out << ',';
    out << shape[i];
  }
  out << ')';
  return out.str();
}

std::size_t element_count(const Shape& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return n;
}

void require_same_shape(const Shape& a, const Shape& b, const char* where) {
  if (a != b) {
    throw ShapeError(std::string(where) + ": shape mismatch " + to_string(a) + " vs " +
                     to_string(b));
  }
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(element_count(shape_), fill) {
  for (auto e : shape_) {
    if (e == 0) throw ShapeError("Tensor: zero extent in shape " + to_string(shape_));
  }
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), data_(std::move(values)) {
  for (auto e : shape_) {
    if (e == 0) throw ShapeError("Tensor: zero extent in shape " + to_string(shape_));
  }
  if (data_.size() != element_count(shape_)) {
    throw ShapeError("Tensor: " + std::to_string(data_.size()) +
                     " values do not fill shape " + to_string(shape_));
  }
}

Tensor Tensor::vector(std::initializer_list<double> values) {
  return Tensor({values.size()}, std::vector<double>(values));
}

Tensor Tensor::matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t n = rows.size();
  const std::size_t m = n ? rows.begin()->size() : 0;
  std::vector<double> flat;
  flat.reserve(n * m);
  for (const auto& row : rows) {
    if (row.size() != m) throw ShapeError("Tensor::matrix: ragged rows");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return Tensor({n, m}, std::move(flat));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

std::size_t Tensor::extent(std::size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("Tensor::extent: axis " + std::to_string(axis) + " out of range for " +
                     to_string(shape_));
  }
  return shape_[axis];
}

std::size_t Tensor::offset(std::initializer_list<std::size_t> index) const {
  if (index.size() != shape_.size()) {
    throw ShapeError("Tensor::at: rank " + std::to_string(index.size()) + " index into " +
                     to_string(shape_));
  }
  std::size_t off = 0;
  std::size_t axis = 0;
  for (auto i : index) {
    if (i >= shape_[axis]) throw std::out_of_range("Tensor::at: index out of range");
    off = off * shape_[axis] + i;
    ++axis;
  }
  return off;
}

double& Tensor::at(std::initializer_list<std::size_t> index) { return data_[offset(index)]; }
double Tensor::at(std::initializer_list<std::size_t> index) const {
  return data_[offset(index)];
}

Tensor Tensor::reshaped(Shape shape) const {
  if (element_count(shape) != data_.size()) {
    throw ShapeError("reshape: " + to_string(shape_) + " cannot become " + to_string(shape));
  }
  return Tensor(std::move(shape), data_);
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a.shape(), b.shape(), "hadamard");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b[i];
  return out;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a.shape(), b.shape(), "add");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b[i];
  return out;
}

Tensor subtract(const Tensor& a, const Tensor& b) {
  require_same_shape(a.shape(), b.shape(), "subtract");
  Tensor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b[i];
  return out;
}

Tensor scale(const Tensor& a, double factor) {
  Tensor out = a;
  for (auto& v : out.values()) v *= factor;
  return out;
}

Tensor add_scalar(const Tensor& a, double c) {
  Tensor out = a;
  for (auto& v : out.values()) v += c;
  return out;
}

void add_into(Tensor& acc, const Tensor& b) {
  require_same_shape(acc.shape(), b.shape(), "add_into");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += b[i];
}

void axpy_into(Tensor& acc, double alpha, const Tensor& b) {
  require_same_shape(acc.shape(), b.shape(), "axpy_into");
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += alpha * b[i];
}

namespace {

void require_rank(const Tensor& t, std::size_t rank, const char* where) {
  if (t.rank() != rank) {
    throw ShapeError(std::string(where) + ": expected rank " + std::to_string(rank) +
                     ", got " + to_string(t.shape()));
  }
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank(a, 2, "matmul");
  require_rank(b, 2, "matmul");
  const std::size_t n = a.extent(0), k = a.extent(1), m = b.extent(1);
  if (b.extent(0) != k) {
    throw ShapeError("matmul: shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(b.shape()));
  }
  Tensor c({n, m});
  // i-k-j order: each c(i,j) still accumulates over k in ascending order.
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c.data() + i * m;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a(i, p);
      const double* brow = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) crow[j] += aip * brow[j];
    }
  }
  return c;
}

Tensor matvec(const Tensor& a, const Tensor& x) {
  require_rank(a, 2, "matvec");
  require_rank(x, 1, "matvec");
  if (a.extent(1) != x.size()) {
    throw ShapeError("matvec: shape mismatch " + to_string(a.shape()) + " vs " +
                     to_string(x.shape()));
  }
  Tensor y({a.extent(0)});
  for (std::size_t i = 0; i < a.extent(0); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.extent(1); ++j) acc += a(i, j) * x[j];
    y[i] = acc;
  }
  return y;
}

Tensor transpose(const Tensor& a) {
  require_rank(a, 2, "transpose");
  Tensor t({a.extent(1), a.extent(0)});
  for (std::size_t i = 0; i < a.extent(0); ++i)
    for (std::size_t j = 0; j < a.extent(1); ++j) t(j, i) = a(i, j);
  return t;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a.shape(), b.shape(), "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

Tensor add_column(const Tensor& m, const Tensor& b) {
  require_rank(m, 2, "add_column");
  if (b.size() != m.extent(0)) {
    throw ShapeError("add_column: shape mismatch " + to_string(m.shape()) + " vs " +
                     to_string(b.shape()));
  }
  Tensor out = m;
  for (std::size_t i = 0; i < m.extent(0); ++i)
    for (std::size_t j = 0; j < m.extent(1); ++j) out(i, j) += b[i];
  return out;
}

Tensor sum_columns(const Tensor& m) {
  require_rank(m, 2, "sum_columns");
  Tensor out({m.extent(0)});
  for (std::size_t i = 0; i < m.extent(0); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < m.extent(1); ++j) acc += m(i, j);
    out[i] = acc;
  }
  return out;
}

Tensor column(const Tensor& m, std::size_t j) {
  require_rank(m, 2, "column");
  Tensor out({m.extent(0)});
  for (std::size_t i = 0; i < m.extent(0); ++i) out[i] = m(i, j);
  return out;
}

void set_column(Tensor& m, std::size_t j, const Tensor& v) {
  require_rank(m, 2, "set_column");
  if (v.size() != m.extent(0)) throw ShapeError("set_column: length mismatch");
  for (std::size_t i = 0; i < m.extent(0); ++i) m(i, j) = v[i];
}

double sum(const Tensor& a) {
  double acc = 0.0;
  for (double v : a.values()) acc += v;
  return acc;
}

double mean(const Tensor& a) {
  if (a.empty()) throw ShapeError("mean: empty tensor");
  return sum(a) / static_cast<double>(a.size());
}

double max(const Tensor& a) { return a[argmax(a)]; }

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax: empty tensor");
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::size_t argmax(const Tensor& a) { return argmax(a.values()); }

double l2_norm(const Tensor& a) { return std::sqrt(dot(a, a)); }

bool all_finite(const Tensor& a) {
  for (double v : a.values())
    if (!std::isfinite(v)) return false;
  return true;
}

OutShape out_shape(std::size_t n1, std::size_t n2, const ConvGeometry& geom) {
  if (geom.kernel == 0) throw ShapeError("out_shape: kernel extent must be positive");
  if (geom.stride == 0) throw ShapeError("out_shape: stride must be >= 1");
  const std::size_t p1 = n1 + 2 * geom.padding;
  const std::size_t p2 = n2 + 2 * geom.padding;
  if (geom.kernel > p1 || geom.kernel > p2) {
    throw ShapeError("out_shape: kernel " + std::to_string(geom.kernel) +
                     " exceeds padded input " + to_string({p1, p2}));
  }
  OutShape out;
  out.rows = (p1 - geom.kernel) / geom.stride + 1;
  out.cols = (p2 - geom.kernel) / geom.stride + 1;
  out.inexact = (p1 - geom.kernel) % geom.stride != 0 || (p2 - geom.kernel) % geom.stride != 0;
  return out;
}

Tensor pad_zero(const Tensor& y, std::size_t p) {
  if (y.rank() < 2) throw ShapeError("pad_zero: need at least 2 axes, got " + to_string(y.shape()));
  if (p == 0) return y;
  Shape shape = y.shape();
  const std::size_t n1 = shape[0], n2 = shape[1];
  const std::size_t inner = y.size() / (n1 * n2);
  shape[0] += 2 * p;
  shape[1] += 2 * p;
  Tensor out(shape);
  for (std::size_t i = 0; i < n1; ++i) {
    for (std::size_t j = 0; j < n2; ++j) {
      const double* src = y.data() + (i * n2 + j) * inner;
      double* dst = out.data() + ((i + p) * shape[1] + (j + p)) * inner;
      for (std::size_t r = 0; r < inner; ++r) dst[r] = src[r];
    }
  }
  return out;
}

Tensor flip(const Tensor& k) {
  require_rank(k, 2, "flip");
  const std::size_t m1 = k.extent(0), m2 = k.extent(1);
  Tensor out(k.shape());
  for (std::size_t i = 0; i < m1; ++i)
    for (std::size_t j = 0; j < m2; ++j) out(i, j) = k(m1 - 1 - i, m2 - 1 - j);
  return out;
}

namespace {

struct Window {
  Tensor padded;
  OutShape shape;
  std::size_t m;
};

Window prepare_window(const Tensor& y, const Tensor& k, const ConvGeometry& geom,
                      const char* where) {
  require_rank(y, 2, where);
  require_rank(k, 2, where);
  if (k.extent(0) != k.extent(1)) {
    throw ShapeError(std::string(where) + ": kernel must be square, got " + to_string(k.shape()));
  }
  if (k.extent(0) != geom.kernel) {
    throw ShapeError(std::string(where) + ": kernel " + to_string(k.shape()) +
                     " disagrees with geometry m=" + std::to_string(geom.kernel));
  }
  Window w{pad_zero(y, geom.padding), out_shape(y.extent(0), y.extent(1), geom), geom.kernel};
  return w;
}

}  // namespace

Tensor cross_correlate(const Tensor& y, const Tensor& k, const ConvGeometry& geom) {
  const Window w = prepare_window(y, k, geom, "cross_correlate");
  Tensor out({w.shape.rows, w.shape.cols});
  for (std::size_t i = 0; i < w.shape.rows; ++i) {
    for (std::size_t j = 0; j < w.shape.cols; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < w.m; ++a)
        for (std::size_t b = 0; b < w.m; ++b)
          acc += k(a, b) * w.padded(i * geom.stride + a, j * geom.stride + b);
      out(i, j) = acc;
    }
  }
  return out;
}

Tensor cross_correlate(const Tensor& y, const Tensor& k, std::size_t stride,
                       std::size_t padding) {
  return cross_correlate(y, k, ConvGeometry{k.rank() == 2 ? k.extent(0) : 0, stride, padding});
}

Tensor convolve(const Tensor& y, const Tensor& k, const ConvGeometry& geom) {
  const Window w = prepare_window(y, k, geom, "convolve");
  const std::size_t m = w.m;
  Tensor out({w.shape.rows, w.shape.cols});
  for (std::size_t i = 0; i < w.shape.rows; ++i) {
    for (std::size_t j = 0; j < w.shape.cols; ++j) {
      double acc = 0.0;
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          acc += k(a, b) * w.padded(i * geom.stride + m - 1 - a, j * geom.stride + m - 1 - b);
      out(i, j) = acc;
    }
  }
  return out;
}

Tensor convolve(const Tensor& y, const Tensor& k, std::size_t stride, std::size_t padding) {
  return convolve(y, k, ConvGeometry{k.rank() == 2 ? k.extent(0) : 0, stride, padding});
}

}  // namespace nnl
