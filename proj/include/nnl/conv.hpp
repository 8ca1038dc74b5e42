#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nnl/dense.hpp"
#include "nnl/rng.hpp"
#include "nnl/tensor.hpp"

namespace nnl {

// Image batches are (rows, cols, channels, N); a single image (rows, cols,
// channels) is accepted everywhere and treated as N = 1.

struct ConvLayerSpec {
  std::size_t in_rows = 1;
  std::size_t in_cols = 1;
  std::size_t in_depth = 1;
  std::size_t filters = 1;  // M
  ConvGeometry geometry;

  Shape kernel_shape() const { return {filters, geometry.kernel, geometry.kernel, in_depth}; }
  Shape output_shape() const;  // (rows', cols', M)
  /// M m^2 n3 kernel entries plus one bias per filter.
  std::size_t parameter_count() const;

  bool operator==(const ConvLayerSpec&) const = default;
};

/// Channel f of the output is b_f plus the depth-wise sum of the
/// cross-correlations of every input channel with kernel slice K[f, :, :, c].
Tensor conv_forward(const ConvLayerSpec& spec, const Tensor& kernels, const Tensor& bias,
                    const Tensor& input);

struct ConvBackward {
  Tensor kernels;
  Tensor bias;   // per-channel sum of the upstream gradient
  Tensor input;
};

ConvBackward conv_backward(const ConvLayerSpec& spec, const Tensor& kernels, const Tensor& input,
                           const Tensor& upstream);

/// The activation stage of a conv pipeline, on tensors of any shape.
Tensor detector_forward(const Activation& act, const Tensor& t);
Tensor detector_backward(const Activation& act, const Tensor& t, const Tensor& upstream);

enum class PoolKind { max, avg };

struct PoolSpec {
  PoolKind kind = PoolKind::max;
  std::size_t m = 2;
  std::size_t s = 2;
  std::size_t p = 0;

  bool operator==(const PoolSpec&) const = default;
};

inline constexpr std::size_t kPadSource = static_cast<std::size_t>(-1);

struct PoolForward {
  Tensor output;
  /// Max pooling only: flat input offset that won each window (kPadSource
  /// when a zero from the padding won). Ties go to the first entry in
  /// row-major window order.
  std::vector<std::size_t> argmax;
};

/// Channel-wise windowed max or mean. Padding adds zeros, and averages always
/// divide by m^2.
PoolForward pool_forward(const PoolSpec& spec, const Tensor& input);
Tensor pool_backward(const PoolSpec& spec, const Shape& input_shape, const PoolForward& cache,
                     const Tensor& upstream);

/// Batch normalization over a batch of feature vectors (n_in, b):
///   mu = mean_j y_j,  var = (1/b) sum_j ||y_j - mu||^2  (one scalar)
///   yhat_j = (y_j - mu) / sqrt(var + eps),  out_j = W yhat_j + bias
/// With per_component the variance is taken per feature instead. When
/// var + eps is exactly 0 every deviation is 0 and yhat is defined as 0.
struct BatchNormSpec {
  std::size_t n_in = 1;
  std::size_t n_out = 1;
  double eps = 1e-5;
  bool per_component = false;

  std::size_t parameter_count() const { return n_out * n_in + n_out; }

  bool operator==(const BatchNormSpec&) const = default;
};

struct BatchNormCache {
  Tensor mu;        // (n_in)
  Tensor variance;  // (1), or (n_in) per component
  Tensor y_hat;     // (n_in, b)
  Tensor output;    // (n_out, b)
};

BatchNormCache batchnorm_forward(const BatchNormSpec& spec, const Tensor& W, const Tensor& bias,
                                 const Tensor& batch);

struct BatchNormBackward {
  Tensor W;
  Tensor bias;
  Tensor input;
};

BatchNormBackward batchnorm_backward(const BatchNormSpec& spec, const Tensor& W,
                                     const BatchNormCache& cache, const Tensor& upstream);

enum class LrnMode { inter_channel, intra_channel };

/// Yhat = Y / (kappa + gamma * sum of squares over the window)^beta. The
/// window reaches n/2 (floored) positions to each side along the channel axis
/// (inter) or along both spatial axes (intra), clamped at the borders.
struct LrnSpec {
  LrnMode mode = LrnMode::inter_channel;
  std::size_t n = 2;
  double kappa = 2.0;
  double gamma = 1e-4;
  double beta = 0.75;

  bool operator==(const LrnSpec&) const = default;
};

Tensor lrn_forward(const LrnSpec& spec, const Tensor& input);
Tensor lrn_backward(const LrnSpec& spec, const Tensor& input, const Tensor& upstream);

enum class Mode { train, eval };

struct DropoutSpec {
  double p = 0.5;  // drop probability, 0 <= p < 1

  bool operator==(const DropoutSpec&) const = default;
};

struct DropoutForward {
  Tensor output;
  Tensor mask;  // 0 for dropped entries, 1/(1-p) for kept ones; all ones in eval
};

/// Inverted dropout: kept entries are scaled by 1/(1-p) at train time so the
/// eval pass is the identity.
DropoutForward dropout_forward(double p, Mode mode, Rng& rng, const Tensor& input);
Tensor dropout_backward(const Tensor& mask, const Tensor& upstream);

/// (d1, ..., dk, N) -> (d1*...*dk, N), row-major per sample.
Tensor flatten(const Tensor& batch);
Tensor unflatten(const Tensor& flat, const Shape& sample_shape);

/// Receptive field of one output neuron in a chain of windowed layers:
/// r = 1, then r += (m - 1) * (product of the strides before the layer).
std::size_t receptive_field(std::span<const ConvGeometry> layers);

}  // namespace nnl
