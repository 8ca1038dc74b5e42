#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "nnl/params.hpp"
#include "nnl/rng.hpp"

namespace nnl {

/// Parameter names the update step must leave untouched (transfer learning).
using FrozenSet = std::set<std::string>;

/// theta <- theta - step * grad, for every tensor not in `frozen`.
void gd_step(ParamSet& theta, const GradSet& grad, double step, const FrozenSet& frozen = {});

/// Uniform sample index in [0, n).
std::size_t sgd_sample(std::size_t n, Rng& rng);

/// theta <- theta - step * (1/b) sum_i grads[i], summed in the given order.
void minibatch_step(ParamSet& theta, const std::vector<GradSet>& per_sample_grads, double step,
                    const FrozenSet& frozen = {});

struct AdamConfig {
  double step = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

/// Moment estimates mirroring a ParamSet plus the step counter t.
struct AdamState {
  AdamConfig config;
  TensorMap m1;
  TensorMap m2;
  std::size_t t = 0;

  /// Zero moments shaped like `params`, t = 0.
  static AdamState init(const ParamSet& params, AdamConfig config = {});
};

/// One Adam update with bias-corrected copies of the moments:
///   t += 1
///   m1 = b1 m1 + (1 - b1) g,  m2 = b2 m2 + (1 - b2) g*g
///   theta -= step * (m1 / (1 - b1^t)) / (sqrt(m2 / (1 - b2^t)) + eps)
/// The stored moments are never overwritten by their corrected values.
/// Frozen tensors keep their value and their moments.
void adam_step(AdamState& state, ParamSet& theta, const GradSet& grad,
               const FrozenSet& frozen = {});

/// C g / ||g|| when ||g|| >= C, otherwise g unchanged.
Tensor clip_gradient(const Tensor& g, double threshold);
/// Per named tensor.
void clip_gradients(GradSet& grads, double threshold);

enum class OptimizerKind { gd, sgd, minibatch, adam };

std::string to_string(OptimizerKind kind);
OptimizerKind parse_optimizer(const std::string& text);

struct StopCriterion {
  std::size_t max_iterations = 0;            // 0 = unbounded
  std::optional<double> grad_norm_tolerance;  // stop when ||grad|| < tol
  std::optional<double> step_tolerance;       // stop when ||theta_new - theta|| < tol

  /// Rejects a criterion with nothing set.
  void validate() const;
};

struct DescentResult {
  std::size_t iterations = 0;
  double final_grad_norm = 0.0;
};

/// Plain gradient descent on a deterministic gradient oracle until `stop` fires.
DescentResult gradient_descent(ParamSet& theta,
                               const std::function<GradSet(const ParamSet&)>& gradient,
                               double step, const StopCriterion& stop);

/// Global L2 norm over every tensor of a TensorMap.
double global_norm(const TensorMap& tensors);

struct GradCheckEntry {
  std::string name;
  std::size_t index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  double max_rel_error = 0.0;
  double mean_rel_error = 0.0;
  std::size_t checked = 0;
  GradCheckEntry worst;
  std::vector<GradCheckEntry> entries;
};

/// Central differences (L(theta + h e_i) - L(theta - h e_i)) / 2h against the
/// analytic gradient, entry by entry, with relative error
/// |a - n| / (|a| + |n| + 1e-12). Throws std::runtime_error on a non-finite loss.
/// A nonzero `max_per_tensor` probes at most that many evenly strided entries
/// of each tensor (for large networks).
GradCheckReport gradient_check(const std::function<double(const ParamSet&)>& loss,
                               const ParamSet& theta, const GradSet& analytic, double h = 1e-6,
                               std::size_t max_per_tensor = 0);

}  // namespace nnl
