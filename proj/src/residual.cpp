#include "nnl/residual.hpp"

#include <stdexcept>

namespace nnl {

std::size_t ResidualLayerSpec::parameter_count() const {
  std::size_t count = n_out * n_in + n_out;
  if (needs_projection()) count += n_out * n_in;
  if (learn_tau) count += 1;
  return count;
}

namespace {

void check_layer(const ResidualLayerSpec& spec, const ResidualParams& params, const Tensor& y_prev) {
  if (y_prev.rank() != 2 || y_prev.extent(0) != spec.n_in) {
    throw ShapeError("residual layer: input " + to_string(y_prev.shape()) + " does not have " +
                     std::to_string(spec.n_in) + " rows");
  }
  require_same_shape(params.W.shape(), {spec.n_out, spec.n_in}, "residual W");
  require_same_shape(params.b.shape(), {spec.n_out}, "residual b");
  if (spec.needs_projection()) {
    if (params.P == nullptr || params.P->empty()) {
      throw ShapeError("residual layer: widths " + std::to_string(spec.n_in) + " -> " +
                       std::to_string(spec.n_out) + " need a projection P");
    }
    require_same_shape(params.P->shape(), {spec.n_out, spec.n_in}, "residual P");
  }
  if (spec.activation.kind == ActivationKind::softmax) {
    throw std::invalid_argument("residual layer: softmax is not allowed inside the branch");
  }
}

}  // namespace

ResidualForward res_layer_forward(const ResidualLayerSpec& spec, const ResidualParams& params,
                                  const Tensor& y_prev) {
  check_layer(spec, params, y_prev);
  ResidualForward f;
  f.z = add_column(matmul(params.W, y_prev), params.b);
  f.a = activate(spec.activation, f.z);
  f.y = spec.needs_projection() ? matmul(*params.P, y_prev) : y_prev;
  axpy_into(f.y, params.tau, f.a);
  return f;
}

ResidualBackward res_layer_backward(const ResidualLayerSpec& spec, const ResidualParams& params,
                                    const Tensor& y_prev, const ResidualForward& cache,
                                    const Tensor& upstream) {
  check_layer(spec, params, y_prev);
  require_same_shape(upstream.shape(), cache.y.shape(), "residual upstream");
  ResidualBackward g;
  g.tau = dot(upstream, cache.a);
  const Tensor z_bar = hadamard(scale(upstream, params.tau), activate_prime(spec.activation, cache.z));
  g.W = matmul(z_bar, transpose(y_prev));
  g.b = sum_columns(z_bar);
  if (spec.needs_projection()) {
    g.P = matmul(upstream, transpose(y_prev));
    g.input = matmul(transpose(*params.P), upstream);
  } else {
    g.input = upstream;
  }
  add_into(g.input, matmul(transpose(params.W), z_bar));
  return g;
}

std::string to_string(BlockVariant variant) {
  return variant == BlockVariant::original ? "original" : "preact";
}

BlockVariant parse_block_variant(const std::string& text) {
  if (text == "original") return BlockVariant::original;
  if (text == "preact" || text == "pre_activation") return BlockVariant::pre_activation;
  throw std::invalid_argument("unknown residual block variant: " + text);
}

std::size_t ResidualBlockSpec::parameter_count() const {
  std::size_t count = 4 * n * n + 2 * n;
  if (variant == BlockVariant::pre_activation) count += n;
  return count;
}

namespace {

const Activation kRelu{ActivationKind::relu};

BatchNormSpec block_bn(const ResidualBlockSpec& spec) { return {spec.n, spec.n, spec.eps, false}; }

void check_block(const ResidualBlockSpec& spec, const ParamSet& params, const Tensor& batch) {
  if (batch.rank() != 2 || batch.extent(0) != spec.n) {
    throw ShapeError("residual block: input " + to_string(batch.shape()) + " does not have " +
                     std::to_string(spec.n) + " rows");
  }
  const Shape square{spec.n, spec.n}, vec{spec.n};
  for (const char* name : {"W1", "W2", "G1", "G2"})
    require_same_shape(params[name].shape(), square, name);
  for (const char* name : {"b_g1", "b_g2"}) require_same_shape(params[name].shape(), vec, name);
  if (spec.variant == BlockVariant::pre_activation)
    require_same_shape(params["b2"].shape(), vec, "b2");
}

}  // namespace

BlockForward block_forward(const ResidualBlockSpec& spec, const ParamSet& params,
                           const Tensor& batch) {
  check_block(spec, params, batch);
  const BatchNormSpec bn = block_bn(spec);
  BlockForward f;
  if (spec.variant == BlockVariant::original) {
    f.z1 = matmul(params["W1"], batch);
    f.bn1 = batchnorm_forward(bn, params["G1"], params["b_g1"], f.z1);
    f.a1 = activate(kRelu, f.bn1.output);
    f.z2 = matmul(params["W2"], f.a1);
    f.bn2 = batchnorm_forward(bn, params["G2"], params["b_g2"], f.z2);
    f.s = add(f.bn2.output, batch);
    f.y = activate(kRelu, f.s);
  } else {
    f.bn1 = batchnorm_forward(bn, params["G1"], params["b_g1"], batch);
    f.a1 = activate(kRelu, f.bn1.output);
    f.z1 = matmul(params["W1"], f.a1);
    f.bn2 = batchnorm_forward(bn, params["G2"], params["b_g2"], f.z1);
    f.a2 = activate(kRelu, f.bn2.output);
    f.z2 = add_column(matmul(params["W2"], f.a2), params["b2"]);
    f.s = add(f.z2, batch);
    f.y = f.s;
  }
  return f;
}

BlockBackward block_backward(const ResidualBlockSpec& spec, const ParamSet& params,
                             const Tensor& batch, const BlockForward& cache,
                             const Tensor& upstream) {
  check_block(spec, params, batch);
  require_same_shape(upstream.shape(), cache.y.shape(), "residual block upstream");
  const BatchNormSpec bn = block_bn(spec);
  BlockBackward out;
  out.grads = params.zeros_like();
  GradSet& g = out.grads;
  if (spec.variant == BlockVariant::original) {
    const Tensor s_bar = hadamard(upstream, activate_prime(kRelu, cache.s));
    const BatchNormBackward b2 = batchnorm_backward(bn, params["G2"], cache.bn2, s_bar);
    g["G2"] = b2.W;
    g["b_g2"] = b2.bias;
    g["W2"] = matmul(b2.input, transpose(cache.a1));
    const Tensor a1_bar = matmul(transpose(params["W2"]), b2.input);
    const Tensor bn1_bar = hadamard(a1_bar, activate_prime(kRelu, cache.bn1.output));
    const BatchNormBackward b1 = batchnorm_backward(bn, params["G1"], cache.bn1, bn1_bar);
    g["G1"] = b1.W;
    g["b_g1"] = b1.bias;
    g["W1"] = matmul(b1.input, transpose(batch));
    out.input = s_bar;
    add_into(out.input, matmul(transpose(params["W1"]), b1.input));
  } else {
    const Tensor& z2_bar = upstream;
    g["W2"] = matmul(z2_bar, transpose(cache.a2));
    g["b2"] = sum_columns(z2_bar);
    const Tensor a2_bar = matmul(transpose(params["W2"]), z2_bar);
    const Tensor bn2_bar = hadamard(a2_bar, activate_prime(kRelu, cache.bn2.output));
    const BatchNormBackward b2 = batchnorm_backward(bn, params["G2"], cache.bn2, bn2_bar);
    g["G2"] = b2.W;
    g["b_g2"] = b2.bias;
    g["W1"] = matmul(b2.input, transpose(cache.a1));
    const Tensor a1_bar = matmul(transpose(params["W1"]), b2.input);
    const Tensor bn1_bar = hadamard(a1_bar, activate_prime(kRelu, cache.bn1.output));
    const BatchNormBackward b1 = batchnorm_backward(bn, params["G1"], cache.bn1, bn1_bar);
    g["G1"] = b1.W;
    g["b_g1"] = b1.bias;
    out.input = upstream;
    add_into(out.input, b1.input);
  }
  return out;
}

}  // namespace nnl
