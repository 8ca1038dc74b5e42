#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nnl/params.hpp"
#include "nnl/tensor.hpp"

namespace nnl {

// All losses average over the batch (samples are columns of an (n, N)
// tensor) and their gradients carry the matching 1/N factor, so they can be
// handed straight to backprop.

enum class LossKind { mse, bce, softmax_nll };

std::string to_string(LossKind kind);
LossKind parse_loss(const std::string& text);

/// (1/2N) sum_i ||y_i - s_i||^2.
double mse(const Tensor& y, const Tensor& s);
/// (y - s) / N.
Tensor mse_grad(const Tensor& y, const Tensor& s);

/// Probabilities are clamped to [eps, 1 - eps] before taking logs.
inline constexpr double kBceClamp = 1e-12;

/// Mean over samples of sum_k -s log y - (1 - s) log(1 - y). Labels must be 0 or 1.
double bce(const Tensor& y, const Tensor& s);
Tensor bce_grad(const Tensor& y, const Tensor& s);

/// Mean over samples of -log softmax(logits_i)[label_i]; evaluated as
/// logsumexp(logits) - logits[label] so it never forms log(0).
double softmax_nll(const Tensor& logits, std::span<const std::size_t> labels);
/// (softmax(logits) - one_hot(labels)) / N, the fused gradient w.r.t. logits.
Tensor softmax_nll_grad(const Tensor& logits, std::span<const std::size_t> labels);

// Single-sample conveniences.
double softmax_nll(const Tensor& logits, std::size_t label);
Tensor softmax_nll_grad(const Tensor& logits, std::size_t label);

/// Weight decay lambda ||theta||^2. By default only weight tensors (every
/// parameter whose local name does not start with 'b') are penalized;
/// include_biases switches to penalizing every tensor.
struct WeightDecay {
  double lambda = 0.0;
  bool include_biases = false;
};

double decay_penalty(const ParamSet& params, const WeightDecay& decay);
/// grads += 2 lambda theta on the penalized tensors.
void add_decay_grad(GradSet& grads, const ParamSet& params, const WeightDecay& decay);
/// base_loss + decay_penalty.
double with_weight_decay(double base_loss, const ParamSet& params, const WeightDecay& decay);

}  // namespace nnl
