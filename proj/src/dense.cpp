#include "nnl/dense.hpp"

#include <cmath>

#include "nnl/diagnostics.hpp"
#include "nnl/text.hpp"

namespace nnl {

std::string to_string(const Activation& act) {
  switch (act.kind) {
    case ActivationKind::heaviside: return "heaviside";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::relu: return "relu";
    case ActivationKind::leaky_relu: return "leaky_relu(" + format_real(act.alpha) + ")";
    case ActivationKind::identity: return "identity";
    case ActivationKind::softmax: return "softmax";
  }
  return "?";
}

Activation parse_activation(const std::string& text) {
  if (text == "heaviside") return {ActivationKind::heaviside};
  if (text == "sigmoid") return {ActivationKind::sigmoid};
  if (text == "tanh") return {ActivationKind::tanh};
  if (text == "relu") return {ActivationKind::relu};
  if (text == "identity" || text == "linear") return {ActivationKind::identity};
  if (text == "softmax") return {ActivationKind::softmax};
  if (text.rfind("leaky_relu", 0) == 0) {
    Activation act{ActivationKind::leaky_relu};
    const auto open = text.find('(');
    if (open != std::string::npos) {
      if (text.back() != ')') throw std::invalid_argument("bad activation: " + text);
      act.alpha = parse_real(std::string_view(text).substr(open + 1, text.size() - open - 2));
    } else if (text != "leaky_relu") {
      throw std::invalid_argument("bad activation: " + text);
    }
    if (!(act.alpha > 0.0 && act.alpha < 1.0)) {
      throw std::invalid_argument("leaky_relu slope must lie in (0,1): " + text);
    }
    return act;
  }
  throw std::invalid_argument("unknown activation: " + text);
}

namespace {

double sigmoid(double z) {
  // Branches keep exp() from overflowing for large |z|.
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

Tensor softmax(const Tensor& y) {
  if (y.rank() == 1) {
    const double top = max(y);
    Tensor out(y.shape());
    double total = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      out[i] = std::exp(y[i] - top);
      total += out[i];
    }
    for (auto& v : out.values()) v /= total;
    return out;
  }
  if (y.rank() != 2) throw ShapeError("softmax: expected vector or (n, N) batch, got " + to_string(y.shape()));
  const std::size_t n = y.extent(0), batch = y.extent(1);
  Tensor out(y.shape());
  for (std::size_t j = 0; j < batch; ++j) {
    double top = y(0, j);
    for (std::size_t i = 1; i < n; ++i) top = std::max(top, y(i, j));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      out(i, j) = std::exp(y(i, j) - top);
      total += out(i, j);
    }
    for (std::size_t i = 0; i < n; ++i) out(i, j) /= total;
  }
  return out;
}

Tensor activate(const Activation& act, const Tensor& z) {
  if (act.kind == ActivationKind::softmax) return softmax(z);
  Tensor out = z;
  for (auto& v : out.values()) {
    switch (act.kind) {
      case ActivationKind::heaviside: v = v >= 0.0 ? 1.0 : 0.0; break;
      case ActivationKind::sigmoid: v = sigmoid(v); break;
      case ActivationKind::tanh: v = std::tanh(v); break;
      case ActivationKind::relu: v = v > 0.0 ? v : 0.0; break;
      case ActivationKind::leaky_relu: v = v > 0.0 ? v : act.alpha * v; break;
      case ActivationKind::identity: break;
      case ActivationKind::softmax: break;
    }
  }
  return out;
}

Tensor activate_prime(const Activation& act, const Tensor& z) {
  if (act.kind == ActivationKind::heaviside) {
    throw NonDifferentiableError("heaviside activation has no usable derivative; "
                                 "it is supported for forward inference only");
  }
  if (act.kind == ActivationKind::softmax) {
    throw NonDifferentiableError(
        "softmax derivative is only available fused with the softmax-NLL loss");
  }
  Tensor out = z;
  for (auto& v : out.values()) {
    switch (act.kind) {
      case ActivationKind::sigmoid: {
        const double s = sigmoid(v);
        v = s * (1.0 - s);
        break;
      }
      case ActivationKind::tanh: {
        const double t = std::tanh(v);
        v = 1.0 - t * t;
        break;
      }
      case ActivationKind::relu: v = v > 0.0 ? 1.0 : 0.0; break;
      case ActivationKind::leaky_relu: v = v > 0.0 ? 1.0 : act.alpha; break;
      case ActivationKind::identity: v = 1.0; break;
      default: break;
    }
  }
  return out;
}

namespace {

void check_dense_shapes(const DenseLayerSpec& spec, const Tensor& W, const Tensor& b,
                        const Tensor& y_prev) {
  require_same_shape(W.shape(), {spec.n_out, spec.n_in}, "dense weights");
  require_same_shape(b.shape(), {spec.n_out}, "dense bias");
  if (y_prev.rank() != 2 || y_prev.extent(0) != spec.n_in) {
    throw ShapeError("dense_forward: input " + to_string(y_prev.shape()) + " does not have " +
                     std::to_string(spec.n_in) + " rows");
  }
}

}  // namespace

DenseForward dense_forward(const DenseLayerSpec& spec, const Tensor& W, const Tensor& b,
                           const Tensor& y_prev) {
  check_dense_shapes(spec, W, b, y_prev);
  DenseForward out;
  out.z = add_column(matmul(W, y_prev), b);
  out.y = activate(spec.activation, out.z);
  return out;
}

DenseBackward dense_backward(const DenseLayerSpec& spec, const Tensor& W, const Tensor& y_prev,
                             const Tensor& z, const Tensor& y_bar) {
  require_same_shape(z.shape(), y_bar.shape(), "dense_backward");
  const Tensor z_bar = spec.activation.kind == ActivationKind::softmax
                           ? y_bar
                           : hadamard(y_bar, activate_prime(spec.activation, z));
  DenseBackward g;
  g.W = matmul(z_bar, transpose(y_prev));
  g.b = sum_columns(z_bar);
  g.input = matmul(transpose(W), z_bar);
  return g;
}

std::string to_string(const InitScheme& scheme) {
  switch (scheme.kind) {
    case InitKind::zero: return "zero";
    case InitKind::gaussian: return "gaussian(" + format_real(scheme.stddev) + ")";
    case InitKind::xavier: return "xavier";
    case InitKind::he: return "he";
  }
  return "?";
}

InitScheme parse_init(const std::string& text) {
  if (text == "zero") return {InitKind::zero};
  if (text == "xavier") return {InitKind::xavier};
  if (text == "he") return {InitKind::he};
  if (text.rfind("gaussian(", 0) == 0 && text.back() == ')') {
    const double sd = parse_real(std::string_view(text).substr(9, text.size() - 10));
    if (!(sd > 0)) throw std::invalid_argument("gaussian std must be positive: " + text);
    return {InitKind::gaussian, sd};
  }
  throw std::invalid_argument("unknown init scheme: " + text);
}

Tensor init_tensor(const InitScheme& scheme, const Shape& shape, std::size_t n_in, Rng& rng,
                   TensorRole role) {
  Tensor t(shape);
  double sd = 0.0;
  switch (scheme.kind) {
    case InitKind::zero:
      if (role == TensorRole::weight) {
        warn("constant weight initialization: neurons evolve identically (no symmetry breaking)");
      }
      return t;
    case InitKind::gaussian: sd = scheme.stddev; break;
    case InitKind::xavier:
      if (n_in == 0) throw std::invalid_argument("xavier init needs n_in >= 1");
      sd = 1.0 / std::sqrt(static_cast<double>(n_in));
      break;
    case InitKind::he:
      if (n_in == 0) throw std::invalid_argument("he init needs n_in >= 1");
      sd = std::sqrt(2.0 / static_cast<double>(n_in));
      break;
  }
  for (auto& v : t.values()) v = sd * rng.normal();
  return t;
}

Tensor init_tensor(const InitScheme& scheme, const Shape& shape, std::size_t n_in,
                   std::uint64_t seed, TensorRole role) {
  Rng rng(seed);
  return init_tensor(scheme, shape, n_in, rng, role);
}

std::size_t fnn_parameter_count(const std::vector<std::size_t>& widths) {
  std::size_t total = 0;
  for (std::size_t l = 1; l < widths.size(); ++l) total += widths[l - 1] * widths[l] + widths[l];
  return total;
}

}  // namespace nnl
