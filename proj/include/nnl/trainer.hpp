#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnl/config.hpp"
#include "nnl/data.hpp"
#include "nnl/losses.hpp"
#include "nnl/modelio.hpp"

namespace nnl {

/// A non-finite loss during training or evaluation.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Data for one run. Feed-forward sets keep flattened samples as columns of
/// `data.inputs`; a sequence set stores token ids instead, one row per time
/// step, over a vocabulary of `vocab` tokens whose last entry is EOS.
struct TrainingData {
  Dataset data;
  bool sequence = false;
  std::size_t vocab = 0;
};

/// Builds the configured dataset and its train/val/test partition.
///   idx    the image/label pair; a separate val pair becomes the val part,
///          otherwise the training file is split by `split`
///   csv    first column is the target (class index for softmax_nll)
///   xor    the four XOR points, used for training and validation alike
///   blobs  Gaussian clusters, one per output class
///   echo   random token strings; the target at step t is the input at t-1
///          (EOS at t = 0)
TrainingData load_training_data(const RunConfig& config, const NetworkSpec& spec);

struct Evaluation {
  double loss = 0.0;
  std::optional<double> accuracy;  // classification only
};

/// Loss and accuracy of `model` on samples `indices` in eval mode. A single
/// sigmoid output is scored as class (y >= 0.5).
Evaluation evaluate(const Model& model, const TrainingData& data, LossKind loss,
                    const std::vector<std::size_t>& indices);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  std::optional<double> val_acc;
  double seconds = 0.0;
};

inline constexpr const char* kMetricsHeader = "epoch,train_loss,val_loss,val_acc,seconds";

/// CSV text with header; `with_timing` false blanks the seconds column.
std::string format_metrics(const std::vector<EpochMetrics>& rows, bool with_timing = true);

struct TrainResult {
  Model model;
  std::vector<EpochMetrics> metrics;
};

/// Runs `config.epochs` epochs. gd takes one full-batch step per epoch, sgd
/// one single-sample step per training sample, minibatch and adam one step
/// per shuffled batch. Parameters start from `initial` when given (its frozen
/// set is honoured) and from `config.init` otherwise. `on_epoch` sees each
/// row as soon as it is complete. Throws NumericError on a non-finite loss.
TrainResult train(const RunConfig& config, const TrainingData& data,
                  const std::optional<Model>& initial = std::nullopt,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

}  // namespace nnl
