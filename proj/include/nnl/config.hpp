#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnl {

/// A config problem, reported with the offending line when there is one.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Every knob of a training run. Text form: one `key = value` per line, '#'
/// starts a comment. Unknown keys are rejected.
struct RunConfig {
  std::string architecture;     // layer mini-language, see format_network
  std::string dataset = "idx";  // idx | csv | xor | blobs | echo
  std::string train_images, train_labels, val_images, val_labels;  // idx
  std::string csv;              // csv: first column is the target
  std::string split = "4:1:1";  // csv and blobs
  std::size_t samples = 300;    // blobs and echo
  std::size_t seq_length = 8;   // echo
  std::string loss = "softmax_nll";
  std::string optimizer = "adam";  // gd | sgd | minibatch | adam
  double step = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  double lambda = 0.0;
  bool decay_biases = false;
  double clip = 0.0;  // 0 disables clipping
  std::size_t epochs = 10;
  std::size_t batch_size = 32;
  std::uint64_t seed = 0;
  std::string init = "he";
  std::string out = "runs/latest";

  bool operator==(const RunConfig&) const = default;
};

/// Applies the lines of `text` on top of `base`.
RunConfig parse_config(const std::string& text, RunConfig base = {});
/// Applies a single "key=value" (command-line override).
void apply_setting(RunConfig& config, const std::string& assignment);
/// Every key with its resolved value, in a fixed order; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig& config);

/// Checks the cross-field rules (architecture parses, names are known,
/// required paths are set).
void validate(const RunConfig& config);

std::vector<std::string> preset_names();
/// Throws ConfigError for an unknown name.
RunConfig preset_config(const std::string& name);

/// Directory holding the bundled data sets: $NNL_DATA_DIR, or the source
/// tree's data/ directory.
std::string data_dir();

}  // namespace nnl
