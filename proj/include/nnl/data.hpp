#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnl/tensor.hpp"

namespace nnl {

/// Malformed or unreadable data file.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Partition {
  std::vector<std::size_t> train, val, test;
};

/// Samples live on the last axis of `inputs`. Supervision is either class
/// labels or a dense target batch (features, N).
struct Dataset {
  Tensor inputs;
  std::vector<std::size_t> labels;
  Tensor targets;
  Partition partition;

  std::size_t size() const { return inputs.empty() ? 0 : inputs.shape().back(); }
  bool classification() const { return !labels.empty(); }

  /// Samples `indices` in the given order, as a batch.
  Tensor gather_inputs(const std::vector<std::size_t>& indices) const;
  std::vector<std::size_t> gather_labels(const std::vector<std::size_t>& indices) const;
  Tensor gather_targets(const std::vector<std::size_t>& indices) const;
};

/// Columns `indices` of a batch whose last axis indexes samples.
Tensor gather_samples(const Tensor& batch, const std::vector<std::size_t>& indices);

struct SplitRatios {
  double train = 4, val = 1, test = 1;
};

/// Seeded shuffle, then contiguous train | val | test cut. val and test get
/// floor(N * r / sum(r)) samples, train takes the rest. Every part must be
/// non-empty.
Partition split(std::size_t n, const SplitRatios& ratios, std::uint64_t seed);
void split(Dataset& data, const SplitRatios& ratios, std::uint64_t seed);

/// `part` reshuffled with a seed derived from (seed, epoch) and cut into
/// chunks of b; the last chunk may be shorter.
std::vector<std::vector<std::size_t>> batches(const std::vector<std::size_t>& part, std::size_t b,
                                              std::uint64_t seed, std::uint64_t epoch);

inline constexpr std::uint32_t kIdxImages = 0x00000803;
inline constexpr std::uint32_t kIdxLabels = 0x00000801;

enum class PixelScale { unit, raw };

/// IDX file of unsigned bytes. Images (magic 0x803) come back as (N, rows,
/// cols) scaled by 1/255 unless `raw`; labels (0x801) as the (N) vector of
/// byte values.
Tensor read_idx(const std::string& path, PixelScale scale = PixelScale::unit);
Tensor parse_idx(const std::vector<std::uint8_t>& bytes, PixelScale scale = PixelScale::unit,
                 const std::string& origin = "IDX data");
/// Writes bytes round(value) (values must be integers in [0, 255]); rank 1
/// uses the label magic, rank 3 the image magic.
std::vector<std::uint8_t> encode_idx(const Tensor& values);
void write_idx(const std::string& path, const Tensor& values);

/// (N, d1, ..., dk) -> (d1 * ... * dk, N), the batch layout of the networks.
Tensor samples_to_columns(const Tensor& stacked);
std::vector<std::size_t> to_labels(const Tensor& values);

/// MNIST-style pair of image and label files as a classification dataset of
/// flattened images (rows * cols, N).
Dataset load_idx_dataset(const std::string& images, const std::string& labels,
                         PixelScale scale = PixelScale::unit);

/// Comma separated floats, one sample per row. A first row whose first field
/// is not numeric is taken as a header. With a target column, the first
/// column is split off as the supervision.
struct CsvTable {
  std::vector<std::string> header;
  Tensor features;              // (rows, d)
  std::vector<double> targets;  // filled when has_target
};

CsvTable read_csv(const std::string& path, bool has_target);
CsvTable parse_csv(const std::string& text, bool has_target, const std::string& origin = "CSV");

/// Column j is e_{labels[j]}: a (classes, N) batch.
Tensor one_hot_labels(const std::vector<std::size_t>& labels, std::size_t classes);
/// Argmax per column.
std::vector<std::size_t> decode_one_hot(const Tensor& batch);

/// Fraction of columns whose argmax equals the label.
double accuracy(const Tensor& scores, const std::vector<std::size_t>& labels);

}  // namespace nnl
