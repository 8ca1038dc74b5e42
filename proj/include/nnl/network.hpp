#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "nnl/conv.hpp"
#include "nnl/dense.hpp"
#include "nnl/losses.hpp"
#include "nnl/params.hpp"
#include "nnl/recurrent.hpp"
#include "nnl/residual.hpp"
#include "nnl/rng.hpp"

namespace nnl {

struct DetectorSpec {
  Activation activation{ActivationKind::relu};
  bool operator==(const DetectorSpec&) const = default;
};

struct FlattenSpec {
  bool operator==(const FlattenSpec&) const = default;
};

using LayerSpec = std::variant<DenseLayerSpec, ConvLayerSpec, DetectorSpec, PoolSpec, BatchNormSpec,
                               LrnSpec, DropoutSpec, FlattenSpec, ResidualLayerSpec,
                               ResidualBlockSpec, RnnCellSpec>;

/// Ordered layer list. Parameters of layer i are named "i.<local>".
/// A recurrent cell is a sequence model and must be the only layer.
struct NetworkSpec {
  std::vector<LayerSpec> layers;

  bool is_sequence_model() const;
  const RnnCellSpec& cell() const;  // throws unless is_sequence_model()

  bool operator==(const NetworkSpec&) const = default;
};

// Architecture text: layers separated by ';', fields by whitespace.
//   dense N_IN N_OUT ACT
//   conv ROWS COLS DEPTH FILTERS M S P
//   detector ACT
//   maxpool M S [P]       avgpool M S [P]
//   batchnorm N_IN N_OUT [EPS] [percomp]
//   lrn inter|intra N KAPPA GAMMA BETA
//   dropout P
//   flatten
//   residual N_IN N_OUT ACT [TAU] [learn_tau]
//   resblock original|preact N [EPS]
//   rnn vanilla|gru|lstm N_U N_H N_Y
// ACT is an activation name such as relu, tanh or leaky_relu(0.1).
std::string format_layer(const LayerSpec& layer);
LayerSpec parse_layer(const std::string& text);
/// Canonical text: every optional field written, layers joined by "; ".
std::string format_network(const NetworkSpec& spec);
NetworkSpec parse_network(const std::string& text);

/// Per-sample shapes before and after every layer (size L + 1). The first
/// layer has to fix the input shape, so it cannot be a detector, pooling, LRN,
/// dropout or flatten layer. Throws ShapeError at the first mismatch.
std::vector<Shape> infer_shapes(const NetworkSpec& spec);

/// (name, shape) of every parameter in canonical order.
std::vector<std::pair<std::string, Shape>> parameter_shapes(const NetworkSpec& spec);
std::size_t param_count(const NetworkSpec& spec);

/// Weights follow `scheme` (fan-in = inputs feeding one output), biases are
/// zero, batch-norm matrices start as the identity, residual projections are
/// Xavier and learnable tau starts at spec.tau.
ParamSet init_params(const NetworkSpec& spec, const InitScheme& scheme, std::uint64_t seed);
/// Parameters of layer `index` only, named as in the full set.
ParamSet init_layer_params(const NetworkSpec& spec, std::size_t index, const InitScheme& scheme,
                           Rng& rng);

struct LayerCache {
  Tensor z;  // dense pre-activation
  PoolForward pool;
  BatchNormCache bn;
  Tensor mask;  // dropout
  ResidualForward res;
  BlockForward block;
};

/// y[0] is the input batch, y[i + 1] the output of layer i.
struct ForwardCache {
  std::vector<Tensor> y;
  std::vector<LayerCache> layers;

  const Tensor& output() const { return y.back(); }
};

/// Batches keep samples on the last axis. Dropout draws from `rng` in train
/// mode (required then) and is the identity in eval mode.
ForwardCache network_forward(const NetworkSpec& spec, const ParamSet& params, const Tensor& batch,
                             Mode mode = Mode::eval, Rng* rng = nullptr);

struct Backprop {
  GradSet grads;
  Tensor input;
};

/// Layer-wise backpropagation from dL/d(output). When the final layer is a
/// dense softmax layer the upstream must be dL/dz instead (softmax_nll_grad).
Backprop backprop(const NetworkSpec& spec, const ParamSet& params, const ForwardCache& cache,
                  const Tensor& output_grad);

/// Supervision for a feed-forward batch: dense targets (mse, bce) or class
/// labels (softmax_nll).
struct Targets {
  Tensor dense;
  std::vector<std::size_t> labels;
};

struct LossAndGrad {
  double loss = 0.0;
  Tensor output_grad;  // ready for backprop
};

/// The network's loss on a forward pass. softmax_nll reads the logits of a
/// final dense softmax layer, or the raw output otherwise; a softmax output
/// only pairs with softmax_nll.
LossAndGrad network_loss(const NetworkSpec& spec, const ForwardCache& cache, LossKind kind,
                         const Targets& targets);

/// Class scores per sample: softmax probabilities or raw outputs.
Tensor class_scores(const ForwardCache& cache);

}  // namespace nnl
