#include "nnl/commands.hpp"

#include <chrono>
#include <numeric>
#include <sstream>

#include "nnl/classic.hpp"
#include "nnl/gradcheck.hpp"
#include "nnl/io.hpp"
#include "nnl/modelio.hpp"
#include "nnl/text.hpp"
#include "nnl/trainer.hpp"

namespace nnl {

namespace {

std::string read_text(const std::string& path) {
  const auto bytes = read_file_bytes(path);
  return {bytes.begin(), bytes.end()};
}

std::string join_path(const std::string& dir, const std::string& file) {
  if (dir.empty()) return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

std::string format_row(std::span<const double> values) {
  std::string s;
  for (std::size_t i = 0; i < values.size(); ++i) s += (i ? "," : "") + format_real(values[i]);
  return s;
}

std::vector<std::size_t> part_indices(const TrainingData& td, const std::string& part) {
  const Partition& p = td.data.partition;
  if (part == "train") return p.train;
  if (part == "val") return p.val;
  if (part == "test") return p.test;
  if (part == "all") {
    std::vector<std::size_t> all(td.data.size());
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  throw ConfigError("unknown part '" + part + "' (train, val, test, all)");
}

bool has_architecture(const ConfigSource& s) { return !s.empty(); }

}  // namespace

RunConfig resolve_config(const ConfigSource& source) {
  RunConfig c = source.preset.empty() ? RunConfig{} : preset_config(source.preset);
  if (!source.config_path.empty()) {
    const std::string text = read_text(source.config_path);
    try {
      c = parse_config(text, c);
    } catch (const ConfigError& e) {
      throw ConfigError(source.config_path + ": " + e.what());
    }
  }
  for (const auto& s : source.settings) apply_setting(c, s);
  if (source.seed) c.seed = *source.seed;
  if (!source.out.empty()) c.out = source.out;
  return c;
}

int cmd_train(const ConfigSource& source, std::ostream& out) {
  const RunConfig config = resolve_config(source);
  validate(config);
  const NetworkSpec spec = parse_network(config.architecture);
  write_file_atomic(join_path(config.out, "config.txt"), format_config(config));
  const TrainingData data = load_training_data(config, spec);
  out << "training " << format_network(spec) << " (" << param_count(spec) << " parameters) on "
      << data.data.partition.train.size() << " samples\n";

  const std::string metrics_path = join_path(config.out, "metrics.csv");
  std::vector<EpochMetrics> rows;
  // Long runs of tiny epochs would spend their time rewriting the file, so
  // progress is flushed at most once a second and always at the end.
  auto last_flush = std::chrono::steady_clock::now();
  const TrainResult result = train(config, data, std::nullopt, [&](const EpochMetrics& m) {
    rows.push_back(m);
    const auto now = std::chrono::steady_clock::now();
    if (m.epoch == config.epochs || now - last_flush >= std::chrono::seconds(1)) {
      write_file_atomic(metrics_path, format_metrics(rows));
      last_flush = now;
    }
    out << "epoch " << m.epoch << " train_loss " << format_real(m.train_loss) << " val_loss "
        << format_real(m.val_loss);
    if (m.val_acc) out << " val_acc " << format_real(*m.val_acc);
    out << "\n";
  });
  write_model_file(join_path(config.out, "model.nnl"), result.model);
  out << "wrote " << join_path(config.out, "model.nnl") << "\n";
  return kExitOk;
}

int cmd_eval(const EvalOptions& o, std::ostream& out) {
  const Model model = read_model_file(o.model);
  RunConfig config = resolve_config(o.source);
  config.architecture = format_network(model.spec);
  if (!o.csv.empty()) {
    config.dataset = "csv";
    config.csv = o.csv;
  }
  validate(config);
  const TrainingData data = load_training_data(config, model.spec);
  const std::string part = !o.part.empty() ? o.part : (o.csv.empty() ? "val" : "all");
  const auto indices = part_indices(data, part);
  if (indices.empty()) throw DataError("the " + part + " part is empty");
  const Evaluation ev = evaluate(model, data, parse_loss(config.loss), indices);
  out << "samples " << indices.size() << "\n";
  out << "loss " << format_real(ev.loss) << "\n";
  if (ev.accuracy) out << "accuracy " << format_real(*ev.accuracy) << "\n";
  return kExitOk;
}

int cmd_predict(const PredictOptions& o, std::ostream& out) {
  if (o.csv.empty() == o.row.empty()) throw ConfigError("predict needs exactly one of --csv or --row");
  const Model model = read_model_file(o.model);
  if (model.spec.is_sequence_model()) throw ConfigError("predict works on feed-forward models");
  const CsvTable table = o.csv.empty() ? parse_csv(o.row, false, "--row") : read_csv(o.csv, false);
  const Tensor features = transpose(table.features);
  Shape shape = infer_shapes(model.spec).front();
  if (element_count(shape) != features.extent(0)) {
    throw DataError("samples have " + std::to_string(features.extent(0)) + " features, the model expects " +
                    std::to_string(element_count(shape)));
  }
  shape.push_back(features.extent(1));
  const ForwardCache cache = network_forward(model.spec, model.params, features.reshaped(shape));
  const Tensor& y = cache.output();
  if (y.rank() != 2) throw ShapeError("predict: the model output is not a vector per sample");

  const auto* last = std::get_if<DenseLayerSpec>(&model.spec.layers.back());
  const bool thresholded = y.extent(0) == 1 && last != nullptr &&
                           (last->activation.kind == ActivationKind::sigmoid ||
                            last->activation.kind == ActivationKind::heaviside);
  const bool classes = y.extent(0) > 1 || thresholded;
  out << "sample";
  for (std::size_t k = 0; k < y.extent(0); ++k) out << ",y" << k;
  if (classes) out << ",class";
  out << "\n";
  for (std::size_t j = 0; j < y.extent(1); ++j) {
    const Tensor col = column(y, j);
    out << j << "," << format_row(col.values());
    if (classes) out << "," << (thresholded ? static_cast<std::size_t>(col[0] >= 0.5) : argmax(col));
    out << "\n";
  }
  return kExitOk;
}

int cmd_gradcheck(const GradcheckOptionsCli& o, std::ostream& out) {
  GradcheckOptions opts;
  opts.seed = o.seed;
  opts.corrupt = o.corrupt;
  std::vector<GradcheckCase> cases;
  if (o.architecture || has_architecture(o.source)) {
    const std::string text = o.architecture ? *o.architecture : resolve_config(o.source).architecture;
    if (trim(text).empty()) throw ConfigError("gradcheck: the architecture is empty");
    opts.max_per_tensor = o.max_per_tensor;
    GradcheckCase c = gradcheck_network(parse_network(text), opts);
    c.name = "network";
    cases.push_back(std::move(c));
  } else {
    cases = gradcheck_suite(opts);
  }
  bool ok = true;
  for (const auto& c : cases) {
    const bool pass = c.report.max_rel_error <= o.tolerance;
    ok = ok && pass;
    out << (pass ? "PASS " : "FAIL ") << c.name << " max_rel_error " << format_real(c.report.max_rel_error)
        << " checked " << c.report.checked << " worst " << c.report.worst.name << "[" << c.report.worst.index
        << "]  " << c.architecture << "\n";
  }
  out << (ok ? "gradcheck passed" : "gradcheck FAILED") << " (tolerance " << format_real(o.tolerance) << ")\n";
  return ok ? kExitOk : kExitGradcheck;
}

int cmd_kmeans(const KMeansCommand& o, std::ostream& out) {
  const CsvTable table = read_csv(o.csv, false);
  const KMeansResult r = kmeans(table.features, o.k, o.seed, {o.restarts, 500});
  std::string assignments = "index,cluster\n";
  for (std::size_t i = 0; i < r.assignment.size(); ++i)
    assignments += std::to_string(i) + "," + std::to_string(r.assignment[i]) + "\n";
  std::string centroids = "cluster";
  for (std::size_t f = 0; f < r.centroids.extent(1); ++f) centroids += ",x" + std::to_string(f);
  centroids += "\n";
  for (std::size_t c = 0; c < r.centroids.extent(0); ++c)
    centroids += std::to_string(c) + "," + format_row(column(transpose(r.centroids), c).values()) + "\n";
  write_file_atomic(join_path(o.out, "assignments.csv"), assignments);
  write_file_atomic(join_path(o.out, "centroids.csv"), centroids);
  out << "points " << r.assignment.size() << " clusters " << o.k << "\n";
  out << "distortion " << format_real(r.distortion) << "\n";
  out << "best_restart " << r.best_restart << " iterations " << r.runs[r.best_restart].iterations << "\n";
  out << "wrote " << join_path(o.out, "assignments.csv") << " and " << join_path(o.out, "centroids.csv") << "\n";
  return kExitOk;
}

int cmd_polyfit(const PolyfitCommand& o, std::ostream& out) {
  Samples1d train, test;
  auto from_csv = [](const std::string& path) {
    const CsvTable t = read_csv(path, true);
    if (t.features.extent(1) != 1) throw DataError(path + ": polyfit expects rows \"s,u\"");
    Samples1d d;
    d.s = t.targets;
    for (std::size_t i = 0; i < t.features.extent(0); ++i) d.u.push_back(t.features(i, 0));
    return d;
  };
  if (o.csv.empty()) {
    if (!o.test.empty()) throw ConfigError("--test needs --csv");
    Rng rng(o.seed);
    train = noisy_sine(o.points, o.noise, rng);
    test = noisy_sine(o.points, o.noise, rng);
  } else {
    train = from_csv(o.csv);
    if (!o.test.empty()) test = from_csv(o.test);
  }
  auto target = [](const Samples1d& d) { return Tensor(Shape{d.s.size()}, std::vector<double>(d.s)); };
  auto error = [&](const Samples1d& d, const Tensor& W, std::size_t degree) {
    return fit_loss(poly_features(d.u, degree), target(d), W);
  };
  auto fit = [&](std::size_t degree) { return ridge_fit(poly_features(train.u, degree), target(train), o.lambda); };

  if (!o.sweep.empty()) {
    out << "degree,train_error,test_error\n";
    for (std::size_t degree : o.sweep) {
      const Tensor W = fit(degree);
      out << degree << "," << format_real(error(train, W, degree)) << ","
          << (test.u.empty() ? "" : format_real(error(test, W, degree))) << "\n";
    }
    return kExitOk;
  }
  const Tensor W = fit(o.degree);
  out << "degree " << o.degree << " lambda " << format_real(o.lambda) << "\n";
  out << "coefficients " << format_row(W.values()) << "\n";
  out << "train_error " << format_real(error(train, W, o.degree)) << "\n";
  if (!test.u.empty()) out << "test_error " << format_real(error(test, W, o.degree)) << "\n";
  return kExitOk;
}

int cmd_inspect(const std::string& model_path, std::ostream& out) {
  out << describe_model(read_file_bytes(model_path));
  return kExitOk;
}

int guarded(const std::function<int()>& command, std::ostream& err) {
  try {
    return command();
  } catch (const NumericError& e) {
    err << "error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace nnl
