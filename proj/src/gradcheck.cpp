#include "nnl/gradcheck.hpp"

#include <cmath>
#include <stdexcept>

namespace nnl {

namespace {

bool softmax_head(const NetworkSpec& spec) {
  const auto* d = std::get_if<DenseLayerSpec>(&spec.layers.back());
  return d != nullptr && d->activation.kind == ActivationKind::softmax;
}

Tensor random_tensor(Shape shape, Rng& rng, bool uniform) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = uniform ? 2.0 * rng.uniform() - 1.0 : rng.normal();
  return t;
}

ParamSet noisy_params(const NetworkSpec& spec, std::uint64_t seed) {
  ParamSet p = init_params(spec, InitScheme{InitKind::xavier}, seed);
  Rng rng(mix_seed(seed, 1));
  for (auto& e : p) {
    // Matrices scale the noise by their fan-in so wide layers stay out of saturation.
    const Shape& shape = e.value.shape();
    const double sd = shape.size() < 2 ? 0.3 : 0.3 / std::sqrt(static_cast<double>(shape.back()));
    for (auto& v : e.value.values()) v += sd * rng.normal();
  }
  return p;
}

ParamSet without_inputs(const ParamSet& theta) {
  ParamSet p;
  for (const auto& e : theta)
    if (!e.name.starts_with("input")) p.insert(e.name, e.value);
  return p;
}

double pairing(const Tensor& y, const Tensor& c) { return sum(hadamard(y, c)); }

GradcheckCase check_sequence(const NetworkSpec& spec, const GradcheckOptions& o) {
  const RnnCellSpec& cell = spec.cell();
  const ParamSet params = noisy_params(spec, o.seed);
  const ParamSet local = select_prefix(params, "0.");
  Rng rng(mix_seed(o.seed, 2));
  ParamSet theta = params;
  std::vector<Tensor> weights;
  for (std::size_t t = 0; t < o.steps; ++t) theta.insert("input." + std::to_string(t), random_tensor({cell.n_u, o.batch}, rng, true));
  for (std::size_t t = 0; t < o.steps; ++t) weights.push_back(random_tensor({cell.n_y, o.batch}, rng, false));

  auto inputs_of = [&](const ParamSet& th) {
    SequenceBatch b;
    b.wiring = Wiring::aligned;
    b.t_out = o.steps;
    for (std::size_t t = 0; t < o.steps; ++t) b.inputs.push_back(th["input." + std::to_string(t)]);
    return b;
  };
  auto loss = [&](const ParamSet& th) {
    const SequenceForward f = unroll(cell, select_prefix(without_inputs(th), "0."), inputs_of(th));
    double total = 0.0;
    for (std::size_t t = 0; t < f.outputs.size(); ++t) total += pairing(f.outputs[t], weights[t]);
    return total;
  };

  const SequenceForward f = unroll(cell, local, inputs_of(theta));
  const BpttResult r = bptt(cell, local, f, weights);
  GradSet analytic;
  merge_prefixed(analytic, r.grads, "0.");
  for (std::size_t t = 0; t < o.steps; ++t) analytic.insert("input." + std::to_string(t), r.input_grads[t]);
  if (o.corrupt) {
    Tensor& first = analytic.begin()->value;
    first = scale(first, -1.0);
  }
  return {"", format_network(spec), gradient_check(loss, theta, analytic, o.h, o.max_per_tensor)};
}

}  // namespace

GradcheckCase gradcheck_network(const NetworkSpec& spec, const GradcheckOptions& o) {
  if (spec.layers.empty()) throw std::invalid_argument("gradcheck: the network has no layers");
  if (o.batch == 0) throw std::invalid_argument("gradcheck: batch must be positive");
  if (spec.is_sequence_model()) return check_sequence(spec, o);

  const std::vector<Shape> shapes = infer_shapes(spec);
  const ParamSet params = noisy_params(spec, o.seed);
  Rng rng(mix_seed(o.seed, 2));
  Shape in = shapes.front(), out = shapes.back();
  in.push_back(o.batch);
  out.push_back(o.batch);
  ParamSet theta = params;
  theta.insert("input", random_tensor(in, rng, true));
  const Tensor weights = random_tensor(out, rng, false);
  const bool head = softmax_head(spec);
  std::vector<std::size_t> labels;
  if (head)
    for (std::size_t j = 0; j < o.batch; ++j) labels.push_back(rng.index(shapes.back().front()));

  auto forward = [&](const ParamSet& p, const Tensor& x) {
    Rng mask(mix_seed(o.seed, 3));
    return network_forward(spec, p, x, Mode::train, &mask);
  };
  auto loss_and_grad = [&](const ForwardCache& cache) {
    if (head) return network_loss(spec, cache, LossKind::softmax_nll, Targets{{}, labels});
    return LossAndGrad{pairing(cache.output(), weights), weights};
  };
  auto loss = [&](const ParamSet& th) { return loss_and_grad(forward(without_inputs(th), th["input"])).loss; };

  const ForwardCache cache = forward(params, theta["input"]);
  const Backprop bp = backprop(spec, params, cache, loss_and_grad(cache).output_grad);
  GradSet analytic = bp.grads;
  analytic.insert("input", bp.input);
  if (o.corrupt) {
    Tensor& first = analytic.begin()->value;
    first = scale(first, -1.0);
  }
  return {"", format_network(spec), gradient_check(loss, theta, analytic, o.h, o.max_per_tensor)};
}

std::vector<std::pair<std::string, std::string>> gradcheck_suite_specs() {
  return {
      {"dense_sigmoid", "dense 3 4 sigmoid; dense 4 2 sigmoid"},
      {"dense_tanh", "dense 3 4 tanh; dense 4 2 tanh"},
      {"dense_relu", "dense 3 4 relu; dense 4 2 relu"},
      {"dense_leaky_relu", "dense 3 4 leaky_relu(0.1); dense 4 2 leaky_relu(0.1)"},
      {"dense_softmax_nll", "dense 3 4 tanh; dense 4 3 softmax"},
      {"conv_detector_flatten", "conv 5 5 2 3 3 1 1; detector tanh; flatten; dense 75 2 identity"},
      {"conv_strided", "conv 6 6 1 2 2 2 0; detector sigmoid"},
      {"maxpool", "conv 6 6 1 2 3 1 1; maxpool 2 2"},
      {"avgpool", "conv 6 6 1 2 3 1 1; avgpool 2 2 1"},
      {"batchnorm_scalar", "dense 3 4 tanh; batchnorm 4 3"},
      {"batchnorm_percomp", "dense 3 4 tanh; batchnorm 4 3 0.00001 percomp"},
      {"lrn_inter", "conv 4 4 2 4 3 1 1; lrn inter 3 1 0.1 0.75"},
      {"lrn_intra", "conv 4 4 2 2 3 1 1; lrn intra 3 1 0.1 0.75"},
      {"dropout", "dense 3 5 tanh; dropout 0.4; dense 5 2 identity"},
      {"residual_layer", "residual 3 4 tanh 0.5 learn_tau; residual 4 4 relu"},
      {"resblock_original", "dense 3 4 tanh; resblock original 4"},
      {"resblock_preact", "dense 3 4 tanh; resblock preact 4"},
      {"rnn_vanilla", "rnn vanilla 3 4 2 tanh"},
      {"rnn_gru", "rnn gru 3 4 2"},
      {"rnn_lstm", "rnn lstm 3 4 2"},
  };
}

std::vector<GradcheckCase> gradcheck_suite(const GradcheckOptions& options) {
  std::vector<GradcheckCase> out;
  for (const auto& [name, text] : gradcheck_suite_specs()) {
    GradcheckOptions o = options;
    // Batch norm needs a few samples for a generic batch variance.
    if (text.find("batchnorm") != std::string::npos || text.find("resblock") != std::string::npos)
      o.batch = std::max<std::size_t>(o.batch, 4);
    GradcheckCase c = gradcheck_network(parse_network(text), o);
    c.name = name;
    out.push_back(std::move(c));
  }
  return out;
}

}  // namespace nnl
