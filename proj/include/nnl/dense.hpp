#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "nnl/rng.hpp"
#include "nnl/tensor.hpp"

namespace nnl {

enum class ActivationKind { heaviside, sigmoid, tanh, relu, leaky_relu, identity, softmax };

struct Activation {
  ActivationKind kind = ActivationKind::identity;
  double alpha = 0.01;  // leaky_relu slope, 0 < alpha < 1

  bool operator==(const Activation&) const = default;
};

/// "relu", "leaky_relu(0.1)", ...; inverse of parse_activation.
std::string to_string(const Activation& act);
Activation parse_activation(const std::string& text);

class NonDifferentiableError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Componentwise activation. Softmax acts per sample: on a vector, or on
/// each column of an (n, N) batch.
Tensor activate(const Activation& act, const Tensor& z);

/// Componentwise derivative. relu'(0) = 0 and leaky'(0) = alpha. Heaviside
/// throws NonDifferentiableError; softmax throws because its derivative only
/// exists fused into the softmax-NLL loss gradient.
Tensor activate_prime(const Activation& act, const Tensor& z);

/// Max-subtracted softmax of a vector, or of every column of an (n, N) batch.
Tensor softmax(const Tensor& y);

struct DenseLayerSpec {
  std::size_t n_in = 1;
  std::size_t n_out = 1;
  Activation activation;

  bool operator==(const DenseLayerSpec&) const = default;
};

struct DenseForward {
  Tensor z;  // W y_prev + b, (n_out, N)
  Tensor y;  // sigma(z)
};

/// z = W y_prev + b, y = sigma(z) on a batch with samples in columns.
DenseForward dense_forward(const DenseLayerSpec& spec, const Tensor& W, const Tensor& b,
                           const Tensor& y_prev);

struct DenseBackward {
  Tensor W;      // sum_i zbar y_prev^T
  Tensor b;      // sum_i zbar
  Tensor input;  // W^T zbar
};

/// One step of layer-wise backpropagation: zbar = ybar (.) sigma'(z), then the
/// weight, bias and input gradients. For a softmax layer `y_bar` must already
/// be the gradient with respect to the logits z (see softmax_nll_grad).
DenseBackward dense_backward(const DenseLayerSpec& spec, const Tensor& W, const Tensor& y_prev,
                             const Tensor& z, const Tensor& y_bar);

enum class InitKind { zero, gaussian, xavier, he };

struct InitScheme {
  InitKind kind = InitKind::xavier;
  double stddev = 0.01;  // gaussian only

  bool operator==(const InitScheme&) const = default;
};

std::string to_string(const InitScheme& scheme);
InitScheme parse_init(const std::string& text);

enum class TensorRole { weight, bias };

/// Gaussian initialization with std 1/sqrt(n_in) (xavier), sqrt(2/n_in) (he)
/// or a fixed std; zero fills. A zero weight tensor triggers a symmetry
/// breaking warning; zero biases are fine.
Tensor init_tensor(const InitScheme& scheme, const Shape& shape, std::size_t n_in, Rng& rng,
                   TensorRole role = TensorRole::weight);
Tensor init_tensor(const InitScheme& scheme, const Shape& shape, std::size_t n_in,
                   std::uint64_t seed, TensorRole role = TensorRole::weight);

/// Weights plus biases of a fully connected chain n_0, ..., n_L.
std::size_t fnn_parameter_count(const std::vector<std::size_t>& widths);

}  // namespace nnl
