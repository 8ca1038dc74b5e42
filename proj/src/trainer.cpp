#include "nnl/trainer.hpp"

#include <chrono>
#include <cmath>
#include <numeric>

#include "nnl/text.hpp"

namespace nnl {

namespace {

std::vector<std::size_t> iota_indices(std::size_t begin, std::size_t end) {
  std::vector<std::size_t> v(end - begin);
  std::iota(v.begin(), v.end(), begin);
  return v;
}

SplitRatios parse_ratios(const std::string& text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw ConfigError("split must look like 4:1:1, got '" + text + "'");
  try {
    return {parse_real(parts[0]), parse_real(parts[1]), parse_real(parts[2])};
  } catch (const std::invalid_argument& e) {
    throw ConfigError("split: " + std::string(e.what()));
  }
}

Tensor join_columns(const Tensor& a, const Tensor& b) {
  const std::size_t d = a.extent(0), na = a.extent(1), nb = b.extent(1);
  Tensor out({d, na + nb});
  for (std::size_t f = 0; f < d; ++f) {
    for (std::size_t j = 0; j < na; ++j) out(f, j) = a(f, j);
    for (std::size_t j = 0; j < nb; ++j) out(f, na + j) = b(f, j);
  }
  return out;
}

std::size_t output_width(const std::vector<Shape>& shapes) { return element_count(shapes.back()); }

TrainingData idx_data(const RunConfig& c, std::size_t d) {
  TrainingData td;
  Dataset train = load_idx_dataset(c.train_images, c.train_labels);
  if (train.inputs.extent(0) != d) {
    throw DataError(c.train_images + ": images have " + std::to_string(train.inputs.extent(0)) +
                    " pixels, the network expects " + std::to_string(d) + " inputs");
  }
  if (c.val_images.empty()) {
    td.data = std::move(train);
    split(td.data, parse_ratios(c.split), c.seed);
    return td;
  }
  Dataset val = load_idx_dataset(c.val_images, c.val_labels);
  if (val.inputs.extent(0) != d) throw DataError(c.val_images + ": image size differs from the training set");
  const std::size_t n_train = train.size(), n_val = val.size();
  td.data.inputs = join_columns(train.inputs, val.inputs);
  td.data.labels = train.labels;
  td.data.labels.insert(td.data.labels.end(), val.labels.begin(), val.labels.end());
  td.data.partition.train = iota_indices(0, n_train);
  td.data.partition.val = iota_indices(n_train, n_train + n_val);
  return td;
}

void attach_targets(Dataset& data, const std::vector<double>& targets, LossKind loss) {
  if (loss == LossKind::softmax_nll || loss == LossKind::bce) {
    Tensor t(Shape{targets.size()});
    for (std::size_t i = 0; i < targets.size(); ++i) t[i] = targets[i];
    data.labels = to_labels(t);
  }
  if (loss != LossKind::softmax_nll) data.targets = Tensor({1, targets.size()}, std::vector<double>(targets));
}

TrainingData csv_data(const RunConfig& c, std::size_t d, LossKind loss) {
  const CsvTable table = read_csv(c.csv, true);
  if (table.features.extent(1) != d) {
    throw DataError(c.csv + ": rows have " + std::to_string(table.features.extent(1)) +
                    " features, the network expects " + std::to_string(d));
  }
  TrainingData td;
  td.data.inputs = transpose(table.features);
  attach_targets(td.data, table.targets, loss);
  split(td.data, parse_ratios(c.split), c.seed);
  return td;
}

TrainingData xor_data(std::size_t d) {
  if (d != 2) throw DataError("dataset xor needs a network with 2 inputs");
  TrainingData td;
  td.data.inputs = Tensor::matrix({{0, 0, 1, 1}, {0, 1, 0, 1}});
  td.data.labels = {0, 1, 1, 0};
  td.data.targets = Tensor::matrix({{0, 1, 1, 0}});
  td.data.partition.train = td.data.partition.val = td.data.partition.test = iota_indices(0, 4);
  return td;
}

TrainingData blob_data(const RunConfig& c, std::size_t d, std::size_t width) {
  const std::size_t classes = width == 1 ? 2 : width;
  Rng rng(mix_seed(c.seed, 0xb10b));
  Tensor centers({classes, d});
  for (auto& v : centers.values()) v = 8.0 * rng.uniform() - 4.0;
  TrainingData td;
  td.data.inputs = Tensor({d, c.samples});
  for (std::size_t j = 0; j < c.samples; ++j) {
    const std::size_t label = j % classes;
    td.data.labels.push_back(label);
    for (std::size_t f = 0; f < d; ++f) td.data.inputs(f, j) = centers(label, f) + rng.normal();
  }
  if (width == 1) {
    td.data.targets = Tensor({1, c.samples});
    for (std::size_t j = 0; j < c.samples; ++j) td.data.targets(0, j) = static_cast<double>(td.data.labels[j]);
  }
  split(td.data, parse_ratios(c.split), c.seed);
  return td;
}

TrainingData echo_data(const RunConfig& c, const RnnCellSpec& cell) {
  if (c.seq_length == 0) throw ConfigError("seq_length must be positive");
  TrainingData td;
  td.sequence = true;
  td.vocab = cell.n_u;
  Rng rng(mix_seed(c.seed, 0xec40));
  td.data.inputs = Tensor({c.seq_length, c.samples});
  for (auto& v : td.data.inputs.values()) v = static_cast<double>(rng.index(td.vocab - 1));
  split(td.data, parse_ratios(c.split), c.seed);
  return td;
}

/// Inputs and targets of the echo task for the given samples.
SequenceBatch echo_batch(const TrainingData& td, const std::vector<std::size_t>& indices) {
  const Tensor tokens = gather_samples(td.data.inputs, indices);
  const std::size_t T = tokens.extent(0), n = indices.size();
  SequenceBatch b;
  b.wiring = Wiring::aligned;
  for (std::size_t t = 0; t < T; ++t) {
    Tensor u({td.vocab, n}), y({td.vocab, n});
    for (std::size_t j = 0; j < n; ++j) {
      u(static_cast<std::size_t>(tokens(t, j)), j) = 1.0;
      const std::size_t target = t == 0 ? td.vocab - 1 : static_cast<std::size_t>(tokens(t - 1, j));
      y(target, j) = 1.0;
    }
    b.inputs.push_back(std::move(u));
    b.targets.push_back(std::move(y));
  }
  return b;
}

Tensor input_batch(const NetworkSpec& spec, const TrainingData& td, const std::vector<std::size_t>& indices) {
  Shape shape = infer_shapes(spec).front();
  shape.push_back(indices.size());
  return td.data.gather_inputs(indices).reshaped(shape);
}

Targets targets_of(const TrainingData& td, const std::vector<std::size_t>& indices) {
  Targets t;
  if (!td.data.targets.empty()) t.dense = td.data.gather_targets(indices);
  if (td.data.classification()) t.labels = td.data.gather_labels(indices);
  return t;
}

double output_accuracy(const Tensor& scores, const std::vector<std::size_t>& labels) {
  if (scores.extent(0) != 1) return accuracy(scores, labels);
  std::size_t hits = 0;
  for (std::size_t j = 0; j < labels.size(); ++j) hits += static_cast<std::size_t>(scores(0, j) >= 0.5) == labels[j];
  return labels.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(labels.size());
}

struct LossGrad {
  double loss = 0.0;
  GradSet grads;
};

LossGrad batch_gradient(const Model& model, const TrainingData& td, LossKind kind,
                        const std::vector<std::size_t>& indices, Rng& rng, double clip) {
  LossGrad out;
  if (td.sequence) {
    const RnnCellSpec& cell = model.spec.cell();
    const ParamSet local = select_prefix(model.params, "0.");
    const SequenceBatch b = echo_batch(td, indices);
    const SequenceForward f = unroll(cell, local, b);
    const SequenceLoss l = sequence_loss(kind, f.outputs, b.targets);
    std::optional<double> c;
    if (clip > 0) c = clip;
    merge_prefixed(out.grads, bptt(cell, local, f, l.output_grads, c).grads, "0.");
    out.loss = l.value;
    return out;
  }
  const ForwardCache cache = network_forward(model.spec, model.params, input_batch(model.spec, td, indices),
                                             Mode::train, &rng);
  const LossAndGrad l = network_loss(model.spec, cache, kind, targets_of(td, indices));
  out.grads = backprop(model.spec, model.params, cache, l.output_grad).grads;
  out.loss = l.loss;
  return out;
}

}  // namespace

TrainingData load_training_data(const RunConfig& c, const NetworkSpec& spec) {
  const LossKind loss = parse_loss(c.loss);
  if (spec.is_sequence_model()) {
    if (c.dataset != "echo") throw ConfigError("recurrent architectures train on the echo dataset");
    return echo_data(c, spec.cell());
  }
  const auto shapes = infer_shapes(spec);
  const std::size_t d = element_count(shapes.front());
  if (c.dataset == "idx") return idx_data(c, d);
  if (c.dataset == "csv") return csv_data(c, d, loss);
  if (c.dataset == "xor") return xor_data(d);
  if (c.dataset == "blobs") return blob_data(c, d, output_width(shapes));
  throw ConfigError("dataset '" + c.dataset + "' does not fit a feed-forward network");
}

Evaluation evaluate(const Model& model, const TrainingData& td, LossKind kind,
                    const std::vector<std::size_t>& indices) {
  if (indices.empty()) throw std::invalid_argument("evaluate: no samples");
  Evaluation ev;
  if (td.sequence) {
    const SequenceBatch b = echo_batch(td, indices);
    const SequenceForward f = unroll(model.spec.cell(), select_prefix(model.params, "0."), b);
    ev.loss = sequence_loss(kind, f.outputs, b.targets).value;
    std::size_t hits = 0, total = 0;
    for (std::size_t t = 0; t < f.outputs.size(); ++t) {
      const auto pred = decode_one_hot(f.outputs[t]);
      const auto truth = decode_one_hot(b.targets[t]);
      for (std::size_t j = 0; j < pred.size(); ++j, ++total) hits += pred[j] == truth[j];
    }
    ev.accuracy = static_cast<double>(hits) / static_cast<double>(total);
  } else {
    const ForwardCache cache = network_forward(model.spec, model.params, input_batch(model.spec, td, indices));
    const Targets targets = targets_of(td, indices);
    ev.loss = network_loss(model.spec, cache, kind, targets).loss;
    if (!targets.labels.empty()) ev.accuracy = output_accuracy(class_scores(cache), targets.labels);
  }
  if (!std::isfinite(ev.loss)) throw NumericError("evaluation loss is not finite");
  return ev;
}

std::string format_metrics(const std::vector<EpochMetrics>& rows, bool with_timing) {
  std::string out = std::string(kMetricsHeader) + "\n";
  for (const auto& r : rows) {
    out += std::to_string(r.epoch) + "," + format_real(r.train_loss) + "," + format_real(r.val_loss) + "," +
           (r.val_acc ? format_real(*r.val_acc) : "") + "," + (with_timing ? format_real(r.seconds) : "") + "\n";
  }
  return out;
}

TrainResult train(const RunConfig& config, const TrainingData& td, const std::optional<Model>& initial,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
  validate(config);
  const LossKind kind = parse_loss(config.loss);
  const OptimizerKind opt = parse_optimizer(config.optimizer);
  TrainResult result;
  Model& model = result.model;
  if (initial) {
    model = *initial;
  } else {
    model.spec = parse_network(config.architecture);
    model.params = init_params(model.spec, parse_init(config.init), config.seed);
  }
  const auto& part = td.data.partition;
  if (part.train.empty()) throw DataError("the training partition is empty");
  const std::vector<std::size_t>& val = part.val.empty() ? part.train : part.val;

  const WeightDecay decay{config.lambda, config.decay_biases};
  AdamState adam = AdamState::init(model.params, {config.step, config.beta1, config.beta2, config.adam_eps});
  Rng rng(mix_seed(config.seed, 0x7472));

  auto step_on = [&](const std::vector<std::size_t>& indices, std::size_t epoch) {
    LossGrad lg = batch_gradient(model, td, kind, indices, rng, config.clip);
    if (!std::isfinite(lg.loss)) throw NumericError("training loss is not finite in epoch " + std::to_string(epoch));
    if (decay.lambda > 0) add_decay_grad(lg.grads, model.params, decay);
    if (config.clip > 0 && !td.sequence) clip_gradients(lg.grads, config.clip);
    if (opt == OptimizerKind::adam)
      adam_step(adam, model.params, lg.grads, model.frozen);
    else
      gd_step(model.params, lg.grads, config.step, model.frozen);
  };

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    switch (opt) {
      case OptimizerKind::gd:
        step_on(part.train, epoch);
        break;
      case OptimizerKind::sgd:
        for (std::size_t k = 0; k < part.train.size(); ++k)
          step_on({part.train[sgd_sample(part.train.size(), rng)]}, epoch);
        break;
      case OptimizerKind::minibatch:
      case OptimizerKind::adam:
        for (const auto& b : batches(part.train, config.batch_size, config.seed, epoch)) step_on(b, epoch);
        break;
    }
    EpochMetrics m;
    m.epoch = epoch;
    m.train_loss = evaluate(model, td, kind, part.train).loss;
    const Evaluation v = evaluate(model, td, kind, val);
    m.val_loss = v.loss;
    m.val_acc = v.accuracy;
    m.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    result.metrics.push_back(m);
    if (on_epoch) on_epoch(m);
  }
  return result;
}

}  // namespace nnl
