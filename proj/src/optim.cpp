#include "nnl/optim.hpp"

#include <cmath>
#include <stdexcept>

namespace nnl {

void gd_step(ParamSet& theta, const GradSet& grad, double step, const FrozenSet& frozen) {
  require_mirror(theta, grad, "gd_step");
  for (auto& [name, value] : theta) {
    if (frozen.contains(name)) continue;
    axpy_into(value, -step, grad[name]);
  }
}

std::size_t sgd_sample(std::size_t n, Rng& rng) { return rng.index(n); }

void minibatch_step(ParamSet& theta, const std::vector<GradSet>& per_sample_grads, double step,
                    const FrozenSet& frozen) {
  if (per_sample_grads.empty()) throw std::invalid_argument("minibatch_step: batch size 0");
  GradSet mean = theta.zeros_like();
  for (const auto& g : per_sample_grads) {
    require_mirror(theta, g, "minibatch_step");
    for (auto& [name, acc] : mean) add_into(acc, g[name]);
  }
  const double inv_b = 1.0 / static_cast<double>(per_sample_grads.size());
  for (auto& [name, acc] : mean) acc = scale(acc, inv_b);
  gd_step(theta, mean, step, frozen);
}

AdamState AdamState::init(const ParamSet& params, AdamConfig config) {
  if (!(config.step > 0)) throw std::invalid_argument("adam: step size must be > 0");
  if (!(config.beta1 >= 0 && config.beta1 < 1) || !(config.beta2 >= 0 && config.beta2 < 1)) {
    throw std::invalid_argument("adam: decay rates must lie in [0,1)");
  }
  if (!(config.eps > 0)) throw std::invalid_argument("adam: eps must be > 0");
  return AdamState{config, params.zeros_like(), params.zeros_like(), 0};
}

void adam_step(AdamState& state, ParamSet& theta, const GradSet& grad, const FrozenSet& frozen) {
  if (state.m1.empty() && !theta.empty()) {
    throw std::logic_error("adam_step: state not initialized (use AdamState::init)");
  }
  require_mirror(theta, state.m1, "adam_step (first moment)");
  require_mirror(theta, state.m2, "adam_step (second moment)");
  require_mirror(theta, grad, "adam_step");
  const AdamConfig& c = state.config;
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double correct1 = 1.0 - std::pow(c.beta1, t);
  const double correct2 = 1.0 - std::pow(c.beta2, t);
  for (auto& [name, value] : theta) {
    if (frozen.contains(name)) continue;
    const Tensor& g = grad[name];
    Tensor& m1 = state.m1[name];
    Tensor& m2 = state.m2[name];
    for (std::size_t i = 0; i < value.size(); ++i) {
      m1[i] = c.beta1 * m1[i] + (1.0 - c.beta1) * g[i];
      m2[i] = c.beta2 * m2[i] + (1.0 - c.beta2) * (g[i] * g[i]);
      const double m1_hat = m1[i] / correct1;
      const double m2_hat = m2[i] / correct2;
      value[i] -= c.step * m1_hat / (std::sqrt(m2_hat) + c.eps);
    }
  }
}

Tensor clip_gradient(const Tensor& g, double threshold) {
  if (!(threshold > 0)) throw std::invalid_argument("clip_gradient: threshold must be > 0");
  const double norm = l2_norm(g);
  if (norm == 0.0 || norm < threshold) return g;
  return scale(g, threshold / norm);
}

void clip_gradients(GradSet& grads, double threshold) {
  for (auto& [name, value] : grads) value = clip_gradient(value, threshold);
}

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::gd: return "gd";
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::minibatch: return "minibatch";
    case OptimizerKind::adam: return "adam";
  }
  return "?";
}

OptimizerKind parse_optimizer(const std::string& text) {
  if (text == "gd") return OptimizerKind::gd;
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "minibatch") return OptimizerKind::minibatch;
  if (text == "adam") return OptimizerKind::adam;
  throw std::invalid_argument("unknown optimizer: " + text);
}

void StopCriterion::validate() const {
  if (max_iterations == 0 && !grad_norm_tolerance && !step_tolerance) {
    throw std::invalid_argument("stop criterion: set max_iterations or a tolerance");
  }
}

double global_norm(const TensorMap& tensors) {
  double acc = 0.0;
  for (const auto& e : tensors) acc += dot(e.value, e.value);
  return std::sqrt(acc);
}

DescentResult gradient_descent(ParamSet& theta,
                               const std::function<GradSet(const ParamSet&)>& gradient,
                               double step, const StopCriterion& stop) {
  stop.validate();
  if (!(step > 0)) throw std::invalid_argument("gradient_descent: step must be > 0");
  DescentResult result;
  while (stop.max_iterations == 0 || result.iterations < stop.max_iterations) {
    const GradSet g = gradient(theta);
    result.final_grad_norm = global_norm(g);
    if (stop.grad_norm_tolerance && result.final_grad_norm < *stop.grad_norm_tolerance) break;
    gd_step(theta, g, step);
    ++result.iterations;
    if (stop.step_tolerance && step * result.final_grad_norm < *stop.step_tolerance) break;
  }
  return result;
}

GradCheckReport gradient_check(const std::function<double(const ParamSet&)>& loss,
                               const ParamSet& theta, const GradSet& analytic, double h,
                               std::size_t max_per_tensor) {
  require_mirror(theta, analytic, "gradient_check");
  if (!(h > 0)) throw std::invalid_argument("gradient_check: h must be > 0");
  GradCheckReport report;
  ParamSet probe = theta;
  double total = 0.0;
  for (const auto& [name, value] : theta) {
    Tensor& slot = probe[name];
    const Tensor& a = analytic[name];
    std::size_t stride = 1;
    if (max_per_tensor > 0 && value.size() > max_per_tensor)
      stride = (value.size() + max_per_tensor - 1) / max_per_tensor;
    for (std::size_t i = 0; i < value.size(); i += stride) {
      const double original = value[i];
      slot[i] = original + h;
      const double plus = loss(probe);
      slot[i] = original - h;
      const double minus = loss(probe);
      slot[i] = original;
      if (!std::isfinite(plus) || !std::isfinite(minus)) {
        throw std::runtime_error("gradient_check: non-finite loss while perturbing " + name +
                                 "[" + std::to_string(i) + "]");
      }
      GradCheckEntry e{name, i, a[i], (plus - minus) / (2.0 * h), 0.0};
      e.rel_error = std::abs(e.analytic - e.numeric) /
                    (std::abs(e.analytic) + std::abs(e.numeric) + 1e-12);
      total += e.rel_error;
      if (report.checked == 0 || e.rel_error > report.max_rel_error) {
        report.max_rel_error = e.rel_error;
        report.worst = e;
      }
      ++report.checked;
      report.entries.push_back(std::move(e));
    }
  }
  if (report.checked) report.mean_rel_error = total / static_cast<double>(report.checked);
  return report;
}

}  // namespace nnl
