#include "nnl/config.hpp"

#include <cstdlib>
#include <functional>
#include <sstream>

#include "nnl/dense.hpp"
#include "nnl/losses.hpp"
#include "nnl/network.hpp"
#include "nnl/optim.hpp"
#include "nnl/text.hpp"

#ifndef NNL_DEFAULT_DATA_DIR
#define NNL_DEFAULT_DATA_DIR "data"
#endif

namespace nnl {

namespace {

struct Key {
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false, got '" + v + "'");
}

template <class T>
Key text_key(const char* name, T RunConfig::*field) {
  return {name, [field](RunConfig& c, const std::string& v) { c.*field = v; },
          [field](const RunConfig& c) { return c.*field; }};
}

Key real_key(const char* name, double RunConfig::*field) {
  return {name, [field](RunConfig& c, const std::string& v) { c.*field = parse_real(v); },
          [field](const RunConfig& c) { return format_real(c.*field); }};
}

Key count_key(const char* name, std::size_t RunConfig::*field) {
  return {name, [field](RunConfig& c, const std::string& v) { c.*field = parse_count(v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = {
      text_key("architecture", &RunConfig::architecture),
      text_key("dataset", &RunConfig::dataset),
      text_key("train_images", &RunConfig::train_images),
      text_key("train_labels", &RunConfig::train_labels),
      text_key("val_images", &RunConfig::val_images),
      text_key("val_labels", &RunConfig::val_labels),
      text_key("csv", &RunConfig::csv),
      text_key("split", &RunConfig::split),
      count_key("samples", &RunConfig::samples),
      count_key("seq_length", &RunConfig::seq_length),
      text_key("loss", &RunConfig::loss),
      text_key("optimizer", &RunConfig::optimizer),
      real_key("step", &RunConfig::step),
      real_key("beta1", &RunConfig::beta1),
      real_key("beta2", &RunConfig::beta2),
      real_key("adam_eps", &RunConfig::adam_eps),
      real_key("lambda", &RunConfig::lambda),
      {"decay_biases", [](RunConfig& c, const std::string& v) { c.decay_biases = parse_bool(v); },
       [](const RunConfig& c) { return std::string(c.decay_biases ? "true" : "false"); }},
      real_key("clip", &RunConfig::clip),
      count_key("epochs", &RunConfig::epochs),
      count_key("batch_size", &RunConfig::batch_size),
      {"seed", [](RunConfig& c, const std::string& v) { c.seed = parse_count(v); },
       [](const RunConfig& c) { return std::to_string(c.seed); }},
      text_key("init", &RunConfig::init),
      text_key("out", &RunConfig::out),
  };
  return table;
}

const Key* find_key(const std::string& name) {
  for (const auto& k : keys())
    if (name == k.name) return &k;
  return nullptr;
}

void apply_line(RunConfig& config, const std::string& raw, const std::string& where) {
  const auto eq = raw.find('=');
  if (eq == std::string::npos) throw ConfigError(where + "expected key = value, got '" + raw + "'");
  const std::string key(trim(raw.substr(0, eq)));
  const std::string value(trim(raw.substr(eq + 1)));
  const Key* k = find_key(key);
  if (k == nullptr) throw ConfigError(where + "unknown key '" + key + "'");
  try {
    k->set(config, value);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(where + "bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    apply_line(base, line, "line " + std::to_string(line_no) + ": ");
  }
  return base;
}

void apply_setting(RunConfig& config, const std::string& assignment) {
  apply_line(config, assignment, "setting '" + assignment + "': ");
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& k : keys()) out += std::string(k.name) + " = " + k.get(config) + "\n";
  return out;
}

void validate(const RunConfig& c) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (trim(c.architecture).empty()) fail("architecture is empty");
  NetworkSpec spec;
  try {
    spec = parse_network(c.architecture);
  } catch (const std::exception& e) {
    fail(std::string("architecture: ") + e.what());
  }
  try {
    parse_loss(c.loss);
    parse_optimizer(c.optimizer);
    parse_init(c.init);
  } catch (const std::invalid_argument& e) {
    fail(e.what());
  }
  if (c.dataset == "idx") {
    if (c.train_images.empty() || c.train_labels.empty()) fail("dataset idx needs train_images and train_labels");
    if (c.val_images.empty() != c.val_labels.empty()) fail("set both val_images and val_labels, or neither");
  } else if (c.dataset == "csv") {
    if (c.csv.empty()) fail("dataset csv needs the csv path");
  } else if (c.dataset == "echo") {
    if (!spec.is_sequence_model()) fail("dataset echo needs a single rnn layer");
    if (spec.cell().n_u != spec.cell().n_y) fail("dataset echo needs n_u = n_y (the vocabulary size)");
    if (spec.cell().n_u < 2) fail("dataset echo needs a vocabulary of at least 2 tokens");
  } else if (c.dataset != "xor" && c.dataset != "blobs") {
    fail("unknown dataset '" + c.dataset + "' (idx, csv, xor, blobs, echo)");
  }
  if (spec.is_sequence_model() && c.dataset != "echo") fail("recurrent architectures train on the echo dataset");
  if (c.epochs == 0) fail("epochs must be positive");
  if (c.batch_size == 0) fail("batch_size must be positive");
  if (!(c.step > 0)) fail("step must be positive");
  if (c.lambda < 0) fail("lambda must be >= 0");
  if (c.clip < 0) fail("clip must be >= 0");
}

std::vector<std::string> preset_names() { return {"xor", "mnist-small", "resnet-toy", "rnn-echo"}; }

std::string data_dir() {
  if (const char* env = std::getenv("NNL_DATA_DIR"); env != nullptr && *env) return env;
  return NNL_DEFAULT_DATA_DIR;
}

RunConfig preset_config(const std::string& name) {
  RunConfig c;
  c.out = "runs/" + name;
  if (name == "xor") {
    c.architecture = "dense 2 2 sigmoid; dense 2 1 sigmoid";
    c.dataset = "xor";
    c.loss = "mse";
    c.optimizer = "adam";
    c.step = 0.01;
    c.epochs = 1000;
    c.batch_size = 4;
    c.init = "xavier";
  } else if (name == "mnist-small") {
    const std::string dir = data_dir() + "/mnist-small/";
    c.architecture = "dense 784 128 relu; dense 128 10 softmax";
    c.dataset = "idx";
    c.train_images = dir + "train-images-idx3-ubyte";
    c.train_labels = dir + "train-labels-idx1-ubyte";
    c.val_images = dir + "val-images-idx3-ubyte";
    c.val_labels = dir + "val-labels-idx1-ubyte";
    c.loss = "softmax_nll";
    c.optimizer = "adam";
    c.epochs = 10;
    c.batch_size = 16;
    c.init = "he";
  } else if (name == "resnet-toy") {
    c.architecture =
        "dense 2 8 relu; resblock original 8; resblock preact 8; dense 8 3 softmax";
    c.dataset = "blobs";
    c.samples = 300;
    c.loss = "softmax_nll";
    c.optimizer = "adam";
    c.step = 0.01;
    c.epochs = 30;
    c.batch_size = 16;
    c.init = "he";
  } else if (name == "rnn-echo") {
    c.architecture = "rnn gru 5 16 5";
    c.dataset = "echo";
    c.samples = 400;
    c.seq_length = 8;
    c.loss = "softmax_nll";
    c.optimizer = "adam";
    c.step = 0.01;
    c.epochs = 30;
    c.batch_size = 16;
    c.clip = 5.0;
    c.init = "xavier";
  } else {
    std::string known;
    for (const auto& n : preset_names()) known += " " + n;
    throw ConfigError("unknown preset '" + name + "' (known:" + known + ")");
  }
  return c;
}

}  // namespace nnl
