#pragma once

#include <cstddef>
#include <string>

#include "nnl/conv.hpp"
#include "nnl/dense.hpp"
#include "nnl/params.hpp"
#include "nnl/tensor.hpp"

namespace nnl {

/// Simplified ResNet layer  y = P y_prev + tau * sigma(W y_prev + b).
/// P is the identity when n_in == n_out and a learnable (n_out, n_in) matrix
/// otherwise. With learn_tau the step size is the parameter "tau" and spec.tau
/// only seeds its initial value.
struct ResidualLayerSpec {
  std::size_t n_in = 1;
  std::size_t n_out = 1;
  Activation activation{ActivationKind::relu};
  double tau = 1.0;
  bool learn_tau = false;

  bool needs_projection() const { return n_in != n_out; }
  std::size_t parameter_count() const;

  bool operator==(const ResidualLayerSpec&) const = default;
};

/// Parameters of one residual layer. `P` stays empty without a projection.
struct ResidualParams {
  const Tensor& W;
  const Tensor& b;
  const Tensor* P = nullptr;
  double tau = 1.0;
};

struct ResidualForward {
  Tensor z;  // W y_prev + b
  Tensor a;  // sigma(z)
  Tensor y;
};

ResidualForward res_layer_forward(const ResidualLayerSpec& spec, const ResidualParams& params,
                                  const Tensor& y_prev);

struct ResidualBackward {
  Tensor W;
  Tensor b;
  Tensor P;      // empty without a projection
  double tau = 0.0;  // sum(upstream * sigma(z)), reported even when tau is fixed
  Tensor input;
};

ResidualBackward res_layer_backward(const ResidualLayerSpec& spec, const ResidualParams& params,
                                    const Tensor& y_prev, const ResidualForward& cache,
                                    const Tensor& upstream);

enum class BlockVariant { original, pre_activation };

std::string to_string(BlockVariant variant);
BlockVariant parse_block_variant(const std::string& text);

/// Two-stage residual block on (n, N) batches with relu activations.
///   original:        x -> W1 -> BN1 -> relu -> W2 -> BN2 -> (+x) -> relu
///   pre_activation:  x -> BN1 -> relu -> W1 -> BN2 -> relu -> W2 + b2 -> (+x)
/// A weight stage that feeds straight into batch norm carries no bias since
/// the normalization would cancel it. Parameter local names:
///   W1, W2            weight stages (n, n)
///   G1, b_g1, G2, b_g2 batch-norm affine maps
///   b2                pre_activation only
struct ResidualBlockSpec {
  BlockVariant variant = BlockVariant::original;
  std::size_t n = 1;
  double eps = 1e-5;

  std::size_t parameter_count() const;

  bool operator==(const ResidualBlockSpec&) const = default;
};

/// Intermediate values. original: z1 = W1 x, a1 = relu(BN1(z1)), z2 = W2 a1,
/// s = BN2(z2) + x, y = relu(s). pre_activation: a1 = relu(BN1(x)), z1 = W1 a1,
/// a2 = relu(BN2(z1)), z2 = W2 a2 + b2, s = y = z2 + x.
struct BlockForward {
  Tensor z1;
  BatchNormCache bn1;
  Tensor a1;
  BatchNormCache bn2;
  Tensor a2;
  Tensor z2;
  Tensor s;
  Tensor y;
};

/// `params` holds the local names listed above.
BlockForward block_forward(const ResidualBlockSpec& spec, const ParamSet& params,
                           const Tensor& batch);

struct BlockBackward {
  GradSet grads;  // same local names as the parameters
  Tensor input;
};

BlockBackward block_backward(const ResidualBlockSpec& spec, const ParamSet& params,
                             const Tensor& batch, const BlockForward& cache,
                             const Tensor& upstream);

}  // namespace nnl
