#include "nnl/data.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <numeric>
#include <sstream>

#include "nnl/rng.hpp"
#include "nnl/text.hpp"

namespace nnl {

Tensor gather_samples(const Tensor& batch, const std::vector<std::size_t>& indices) {
  if (batch.rank() < 1) throw ShapeError("gather_samples: empty batch");
  const std::size_t n = batch.shape().back();
  const std::size_t features = batch.size() / n;
  Shape shape = batch.shape();
  shape.back() = indices.size();
  Tensor out(shape);
  for (std::size_t f = 0; f < features; ++f) {
    for (std::size_t j = 0; j < indices.size(); ++j) {
      if (indices[j] >= n) throw std::out_of_range("gather_samples: index " + std::to_string(indices[j]));
      out[f * indices.size() + j] = batch[f * n + indices[j]];
    }
  }
  return out;
}

Tensor Dataset::gather_inputs(const std::vector<std::size_t>& indices) const {
  return gather_samples(inputs, indices);
}

std::vector<std::size_t> Dataset::gather_labels(const std::vector<std::size_t>& indices) const {
  std::vector<std::size_t> out;
  out.reserve(indices.size());
  for (auto i : indices) out.push_back(labels.at(i));
  return out;
}

Tensor Dataset::gather_targets(const std::vector<std::size_t>& indices) const {
  return gather_samples(targets, indices);
}

Partition split(std::size_t n, const SplitRatios& r, std::uint64_t seed) {
  if (!(r.train > 0 && r.val > 0 && r.test > 0)) throw std::invalid_argument("split: ratios must be positive");
  const double total = r.train + r.val + r.test;
  const auto n_val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r.val / total));
  const auto n_test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * r.test / total));
  if (n_val == 0 || n_test == 0 || n_val + n_test >= n) {
    throw std::invalid_argument("split: " + std::to_string(n) +
                                " samples are too few for a non-empty train/val/test split");
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);
  const std::size_t n_train = n - n_val - n_test;
  Partition p;
  p.train.assign(order.begin(), order.begin() + n_train);
  p.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  p.test.assign(order.begin() + n_train + n_val, order.end());
  return p;
}

void split(Dataset& data, const SplitRatios& ratios, std::uint64_t seed) {
  data.partition = split(data.size(), ratios, seed);
}

std::vector<std::vector<std::size_t>> batches(const std::vector<std::size_t>& part, std::size_t b,
                                              std::uint64_t seed, std::uint64_t epoch) {
  if (b == 0) throw std::invalid_argument("batches: batch size must be positive");
  std::vector<std::size_t> order = part;
  Rng rng(mix_seed(seed, epoch));
  rng.shuffle(order);
  std::vector<std::vector<std::size_t>> out;
  for (std::size_t start = 0; start < order.size(); start += b) {
    const std::size_t stop = std::min(order.size(), start + b);
    out.emplace_back(order.begin() + start, order.begin() + stop);
  }
  return out;
}

namespace {

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<std::uint8_t>& b, std::size_t at) {
  return (std::uint32_t{b[at]} << 24) | (std::uint32_t{b[at + 1]} << 16) |
         (std::uint32_t{b[at + 2]} << 8) | std::uint32_t{b[at + 3]};
}

void put_be32(std::vector<std::uint8_t>& b, std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) b.push_back(static_cast<std::uint8_t>(v >> shift));
}

std::string hex_bytes(const std::vector<std::uint8_t>& b, std::size_t count) {
  std::string out;
  char buf[4];
  for (std::size_t i = 0; i < count && i < b.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%02x", b[i]);
    if (i) out += ' ';
    out += buf;
  }
  return out;
}

}  // namespace

Tensor parse_idx(const std::vector<std::uint8_t>& bytes, PixelScale scale, const std::string& origin) {
  if (bytes.size() < 4) throw DataError(origin + ": too short for an IDX header");
  const std::uint32_t magic = read_be32(bytes, 0);
  if (magic != kIdxImages && magic != kIdxLabels) {
    throw DataError(origin + ": bad IDX magic bytes " + hex_bytes(bytes, 4) +
                    " (expected 00 00 08 03 or 00 00 08 01)");
  }
  const std::size_t rank = magic == kIdxImages ? 3 : 1;
  const std::size_t header = 4 + 4 * rank;
  if (bytes.size() < header) throw DataError(origin + ": truncated IDX header");
  Shape shape;
  std::size_t count = 1;
  for (std::size_t d = 0; d < rank; ++d) {
    const std::size_t extent = read_be32(bytes, 4 + 4 * d);
    if (extent == 0) throw DataError(origin + ": zero IDX dimension");
    if (count > std::numeric_limits<std::size_t>::max() / extent)
      throw DataError(origin + ": IDX dimensions overflow");
    count *= extent;
    shape.push_back(extent);
  }
  if (bytes.size() - header != count) {
    throw DataError(origin + ": IDX payload holds " + std::to_string(bytes.size() - header) +
                    " bytes, header promises " + std::to_string(count));
  }
  std::vector<double> values(count);
  const double factor = (rank == 3 && scale == PixelScale::unit) ? 1.0 / 255.0 : 1.0;
  for (std::size_t i = 0; i < count; ++i) values[i] = static_cast<double>(bytes[header + i]) * factor;
  return Tensor(std::move(shape), std::move(values));
}

Tensor read_idx(const std::string& path, PixelScale scale) { return parse_idx(read_bytes(path), scale, path); }

std::vector<std::uint8_t> encode_idx(const Tensor& values) {
  if (values.rank() != 1 && values.rank() != 3)
    throw ShapeError("encode_idx: expected rank 1 labels or rank 3 images, got " + to_string(values.shape()));
  std::vector<std::uint8_t> out;
  put_be32(out, values.rank() == 3 ? kIdxImages : kIdxLabels);
  for (auto e : values.shape()) put_be32(out, static_cast<std::uint32_t>(e));
  for (double v : values.values()) {
    if (!(v >= 0 && v <= 255) || v != std::round(v))
      throw std::invalid_argument("encode_idx: value " + format_real(v) + " is not a byte");
    out.push_back(static_cast<std::uint8_t>(v));
  }
  return out;
}

void write_idx(const std::string& path, const Tensor& values) {
  const auto bytes = encode_idx(values);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path);
}

Tensor samples_to_columns(const Tensor& stacked) {
  if (stacked.rank() < 1) throw ShapeError("samples_to_columns: empty tensor");
  const std::size_t n = stacked.extent(0), d = stacked.size() / n;
  Tensor out({d, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t f = 0; f < d; ++f) out(f, i) = stacked[i * d + f];
  return out;
}

std::vector<std::size_t> to_labels(const Tensor& values) {
  std::vector<std::size_t> out;
  out.reserve(values.size());
  for (double v : values.values()) {
    if (!(v >= 0) || v != std::floor(v)) throw DataError("label " + format_real(v) + " is not a class index");
    out.push_back(static_cast<std::size_t>(v));
  }
  return out;
}

Dataset load_idx_dataset(const std::string& images, const std::string& labels, PixelScale scale) {
  const Tensor img = read_idx(images, scale);
  const Tensor lab = read_idx(labels);
  if (img.rank() != 3) throw DataError(images + ": not an image file");
  if (lab.rank() != 1) throw DataError(labels + ": not a label file");
  if (img.extent(0) != lab.extent(0)) {
    throw DataError(images + " holds " + std::to_string(img.extent(0)) + " images but " + labels +
                    " holds " + std::to_string(lab.extent(0)) + " labels");
  }
  Dataset d;
  d.inputs = samples_to_columns(img);
  d.labels = to_labels(lab);
  return d;
}

CsvTable parse_csv(const std::string& text, bool has_target, const std::string& origin) {
  CsvTable table;
  std::vector<double> values;
  std::size_t width = 0, rows = 0, line_no = 0;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields = split(line, ',');
    for (auto& f : fields) f = std::string(trim(f));
    if (rows == 0 && table.header.empty() && !is_number(fields[0])) {
      table.header = fields;
      continue;
    }
    if (width == 0) width = fields.size();
    if (fields.size() != width) {
      throw DataError(origin + ":" + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " fields, got " + std::to_string(fields.size()));
    }
    for (const auto& f : fields) {
      try {
        values.push_back(parse_real(f));
      } catch (const std::invalid_argument&) {
        throw DataError(origin + ":" + std::to_string(line_no) + ": '" + f + "' is not a number");
      }
    }
    ++rows;
  }
  if (rows == 0) throw DataError(origin + ": no data rows");
  if (has_target && width < 2) throw DataError(origin + ": need a target column plus features");
  const std::size_t d = has_target ? width - 1 : width;
  table.features = Tensor({rows, d});
  for (std::size_t i = 0; i < rows; ++i) {
    std::size_t col = 0;
    if (has_target) table.targets.push_back(values[i * width]);
    for (std::size_t j = has_target ? 1 : 0; j < width; ++j) table.features(i, col++) = values[i * width + j];
  }
  return table;
}

CsvTable read_csv(const std::string& path, bool has_target) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), has_target, path);
}

Tensor one_hot_labels(const std::vector<std::size_t>& labels, std::size_t classes) {
  Tensor out({classes, labels.size()});
  for (std::size_t j = 0; j < labels.size(); ++j) {
    if (labels[j] >= classes) {
      throw std::out_of_range("one_hot_labels: label " + std::to_string(labels[j]) + " outside " +
                              std::to_string(classes) + " classes");
    }
    out(labels[j], j) = 1.0;
  }
  return out;
}

std::vector<std::size_t> decode_one_hot(const Tensor& batch) {
  if (batch.rank() != 2) throw ShapeError("decode_one_hot: expected (classes, N)");
  std::vector<std::size_t> out(batch.extent(1));
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = argmax(column(batch, j));
  return out;
}

double accuracy(const Tensor& scores, const std::vector<std::size_t>& labels) {
  const std::vector<std::size_t> pred = decode_one_hot(scores);
  if (pred.size() != labels.size()) throw ShapeError("accuracy: prediction and label counts differ");
  if (pred.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t j = 0; j < pred.size(); ++j) hits += pred[j] == labels[j];
  return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace nnl
