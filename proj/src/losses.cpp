#include "nnl/losses.hpp"

#include <algorithm>
#include <cmath>

#include "nnl/dense.hpp"

namespace nnl {

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::mse: return "mse";
    case LossKind::bce: return "bce";
    case LossKind::softmax_nll: return "softmax_nll";
  }
  return "?";
}

LossKind parse_loss(const std::string& text) {
  if (text == "mse") return LossKind::mse;
  if (text == "bce") return LossKind::bce;
  if (text == "softmax_nll" || text == "nll") return LossKind::softmax_nll;
  throw std::invalid_argument("unknown loss: " + text);
}

namespace {

std::size_t batch_size(const Tensor& y) {
  if (y.rank() == 2) return y.extent(1);
  if (y.rank() == 1) return 1;
  throw ShapeError("loss: expected vector or (n, N) batch, got " + to_string(y.shape()));
}

double clamp_prob(double p) { return std::clamp(p, kBceClamp, 1.0 - kBceClamp); }

void check_labels(const Tensor& s) {
  for (double v : s.values()) {
    if (v != 0.0 && v != 1.0) {
      throw std::invalid_argument("bce: label " + std::to_string(v) + " is not 0 or 1");
    }
  }
}

}  // namespace

double mse(const Tensor& y, const Tensor& s) {
  require_same_shape(y.shape(), s.shape(), "mse");
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double d = y[i] - s[i];
    acc += d * d;
  }
  return acc / (2.0 * static_cast<double>(batch_size(y)));
}

Tensor mse_grad(const Tensor& y, const Tensor& s) {
  require_same_shape(y.shape(), s.shape(), "mse_grad");
  return scale(subtract(y, s), 1.0 / static_cast<double>(batch_size(y)));
}

double bce(const Tensor& y, const Tensor& s) {
  require_same_shape(y.shape(), s.shape(), "bce");
  check_labels(s);
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = clamp_prob(y[i]);
    acc += s[i] == 1.0 ? -std::log(p) : -std::log(1.0 - p);
  }
  return acc / static_cast<double>(batch_size(y));
}

Tensor bce_grad(const Tensor& y, const Tensor& s) {
  require_same_shape(y.shape(), s.shape(), "bce_grad");
  check_labels(s);
  const double inv_n = 1.0 / static_cast<double>(batch_size(y));
  Tensor g(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double p = clamp_prob(y[i]);
    g[i] = inv_n * (s[i] == 1.0 ? -1.0 / p : 1.0 / (1.0 - p));
  }
  return g;
}

namespace {

Tensor as_batch(const Tensor& logits) {
  if (logits.rank() == 1) return logits.reshaped({logits.size(), 1});
  if (logits.rank() != 2) {
    throw ShapeError("softmax_nll: expected vector or (n, N) logits, got " +
                     to_string(logits.shape()));
  }
  return logits;
}

void check_class_labels(const Tensor& logits, std::span<const std::size_t> labels) {
  if (labels.size() != logits.extent(1)) {
    throw ShapeError("softmax_nll: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(logits.extent(1)) + " samples");
  }
  for (auto c : labels) {
    if (c >= logits.extent(0)) {
      throw std::out_of_range("softmax_nll: label " + std::to_string(c) + " out of range for " +
                              std::to_string(logits.extent(0)) + " classes");
    }
  }
}

}  // namespace

double softmax_nll(const Tensor& logits_in, std::span<const std::size_t> labels) {
  const Tensor logits = as_batch(logits_in);
  check_class_labels(logits, labels);
  const std::size_t n = logits.extent(0), batch = logits.extent(1);
  double acc = 0.0;
  for (std::size_t j = 0; j < batch; ++j) {
    double top = logits(0, j);
    for (std::size_t i = 1; i < n; ++i) top = std::max(top, logits(i, j));
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) total += std::exp(logits(i, j) - top);
    acc += top + std::log(total) - logits(labels[j], j);
  }
  return acc / static_cast<double>(batch);
}

Tensor softmax_nll_grad(const Tensor& logits_in, std::span<const std::size_t> labels) {
  const Tensor logits = as_batch(logits_in);
  check_class_labels(logits, labels);
  Tensor g = softmax(logits);
  const double inv_n = 1.0 / static_cast<double>(logits.extent(1));
  for (std::size_t j = 0; j < logits.extent(1); ++j) g(labels[j], j) -= 1.0;
  for (auto& v : g.values()) v *= inv_n;
  return g.reshaped(logits_in.shape());
}

double softmax_nll(const Tensor& logits, std::size_t label) {
  return softmax_nll(logits, std::span<const std::size_t>(&label, 1));
}

Tensor softmax_nll_grad(const Tensor& logits, std::size_t label) {
  return softmax_nll_grad(logits, std::span<const std::size_t>(&label, 1));
}

namespace {

bool penalized(const std::string& name, const WeightDecay& decay) {
  return decay.include_biases || !is_bias_name(name);
}

}  // namespace

double decay_penalty(const ParamSet& params, const WeightDecay& decay) {
  if (decay.lambda < 0) throw std::invalid_argument("weight decay lambda must be >= 0");
  if (decay.lambda == 0) return 0.0;
  double acc = 0.0;
  for (const auto& [name, value] : params) {
    if (penalized(name, decay)) acc += dot(value, value);
  }
  return decay.lambda * acc;
}

void add_decay_grad(GradSet& grads, const ParamSet& params, const WeightDecay& decay) {
  if (decay.lambda < 0) throw std::invalid_argument("weight decay lambda must be >= 0");
  if (decay.lambda == 0) return;
  require_mirror(params, grads, "add_decay_grad");
  for (const auto& [name, value] : params) {
    if (penalized(name, decay)) axpy_into(grads[name], 2.0 * decay.lambda, value);
  }
}

double with_weight_decay(double base_loss, const ParamSet& params, const WeightDecay& decay) {
  return base_loss + decay_penalty(params, decay);
}

}  // namespace nnl
