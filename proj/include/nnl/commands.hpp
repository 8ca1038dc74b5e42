#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "nnl/config.hpp"

namespace nnl {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitGradcheck = 4;

/// Where a run's configuration comes from, lowest precedence first: the
/// built-in defaults or a preset, then a config file, then `key=value`
/// settings, then the dedicated --seed and --out flags.
struct ConfigSource {
  std::string preset;
  std::string config_path;
  std::vector<std::string> settings;
  std::optional<std::uint64_t> seed;
  std::string out;

  bool empty() const { return preset.empty() && config_path.empty() && settings.empty(); }
};

RunConfig resolve_config(const ConfigSource& source);

/// Trains and writes <out>/config.txt, <out>/metrics.csv (rewritten after
/// every epoch) and <out>/model.nnl.
int cmd_train(const ConfigSource& source, std::ostream& out);

struct EvalOptions {
  std::string model;
  ConfigSource source;   // data settings; the architecture comes from the model
  std::string part;      // train | val | test | all; default val, or all for --csv
  std::string csv;       // evaluate on this file instead of the configured data
};
int cmd_eval(const EvalOptions& options, std::ostream& out);

struct PredictOptions {
  std::string model;
  std::string csv;  // feature rows without a target column
  std::string row;  // a single comma separated sample
};
/// One CSV row per sample: the outputs, then the predicted class for
/// classifiers.
int cmd_predict(const PredictOptions& options, std::ostream& out);

struct GradcheckOptionsCli {
  ConfigSource source;
  std::optional<std::string> architecture;
  bool corrupt = false;
  double tolerance = 1e-4;
  std::size_t max_per_tensor = 200;  // configured networks only; the suite probes every entry
  std::uint64_t seed = 0;
};
/// Without an architecture (or a preset or config naming one) runs the
/// built-in suite covering every layer family.
int cmd_gradcheck(const GradcheckOptionsCli& options, std::ostream& out);

struct KMeansCommand {
  std::string csv;  // one point per row, no target column
  std::size_t k = 2;
  std::size_t restarts = 1;
  std::uint64_t seed = 0;
  std::string out = "runs/kmeans";
};
/// Writes <out>/assignments.csv and <out>/centroids.csv.
int cmd_kmeans(const KMeansCommand& options, std::ostream& out);

struct PolyfitCommand {
  std::string csv;   // rows "s,u"; empty selects the noisy-sine fixture
  std::string test;  // held-out rows in the same layout
  std::size_t degree = 3;
  double lambda = 0.0;
  std::vector<std::size_t> sweep;  // degrees; one output row each
  std::uint64_t seed = 0;
  std::size_t points = 15;  // per fixture part
  double noise = 0.25;      // fixture noise std
};
int cmd_polyfit(const PolyfitCommand& options, std::ostream& out);

int cmd_inspect(const std::string& model_path, std::ostream& out);

/// Runs `command`, mapping exceptions to exit codes: usage and config
/// problems 1, data and file problems 2, non-finite losses 3. The message
/// goes to `err`.
int guarded(const std::function<int()>& command, std::ostream& err);

}  // namespace nnl
