#include "nnl/modelio.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

#include "nnl/io.hpp"

namespace nnl {

namespace {

class Writer {
 public:
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  void f64(double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int i = 0; i < 8; ++i) bytes_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
  }
  void text(const std::string& s) {
    u32(checked_u32(s.size(), "string length"));
    bytes_.insert(bytes_.end(), s.begin(), s.end());
  }
  void raw(const char* data, std::size_t n) { bytes_.insert(bytes_.end(), data, data + n); }

  static std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > 0xffffffffu) throw std::invalid_argument(std::string("model file: ") + what + " exceeds 32 bits");
    return static_cast<std::uint32_t>(v);
  }

  std::vector<std::uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(const std::vector<std::uint8_t>& bytes) : b_(bytes) {}

  std::size_t size() const { return b_.size(); }

  void need(std::size_t n, const std::string& what) const {
    if (b_.size() - pos_ < n) {
      throw ModelFormatError("model file of " + std::to_string(b_.size()) + " bytes truncated reading " + what +
                             ": expected " + std::to_string(n) +
                             " more bytes at offset " + std::to_string(pos_) + ", have " +
                             std::to_string(b_.size() - pos_));
    }
  }
  std::uint32_t u32(const std::string& what) {
    need(4, what);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= std::uint32_t{b_[pos_ + i]} << (8 * i);
    pos_ += 4;
    return v;
  }
  double f64() {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= std::uint64_t{b_[pos_ + i]} << (8 * i);
    pos_ += 8;
    return std::bit_cast<double>(bits);
  }
  std::string text(const std::string& what) {
    const std::uint32_t n = u32(what + " length");
    need(n, what);
    std::string s(b_.begin() + static_cast<std::ptrdiff_t>(pos_), b_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return b_.size() - pos_; }

 private:
  const std::vector<std::uint8_t>& b_;
  std::size_t pos_ = 0;
};

struct Header {
  std::uint32_t version = 0;
  std::string architecture;
};

Header read_header(Reader& r, const std::vector<std::uint8_t>& bytes) {
  r.need(4, "magic");
  if (std::memcmp(bytes.data(), kModelMagic, 4) != 0) {
    std::ostringstream got;
    for (int i = 0; i < 4; ++i) got << (i ? " " : "") << static_cast<int>(bytes[i]);
    throw ModelFormatError("model file: bad magic (bytes " + got.str() + "), expected \"NNLN\"");
  }
  r.u32("magic");
  Header h;
  h.version = r.u32("version");
  if (h.version != kModelVersion) {
    throw ModelFormatError("model file: unsupported version " + std::to_string(h.version) +
                           " (expected " + std::to_string(kModelVersion) + ")");
  }
  h.architecture = r.text("architecture");
  return h;
}

}  // namespace

std::vector<std::uint8_t> save_model(const Model& model) {
  const auto expected = parameter_shapes(model.spec);
  if (expected.size() != model.params.size()) {
    throw std::invalid_argument("save_model: parameter set does not match the architecture");
  }
  Writer w;
  w.raw(kModelMagic, 4);
  w.u32(kModelVersion);
  w.text(format_network(model.spec));
  w.u32(Writer::checked_u32(model.params.size(), "tensor count"));
  for (const auto& [name, value] : model.params) {
    if (!all_finite(value)) throw std::invalid_argument("save_model: tensor " + name + " is not finite");
    w.text(name);
    w.u32(Writer::checked_u32(value.rank(), "rank"));
    for (auto e : value.shape()) w.u32(Writer::checked_u32(e, "extent"));
    for (double v : value.values()) w.f64(v);
  }
  return w.take();
}

Model load_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const Header h = read_header(r, bytes);
  Model m;
  try {
    m.spec = parse_network(h.architecture);
  } catch (const std::exception& e) {
    throw ModelFormatError(std::string("model file: architecture does not parse: ") + e.what());
  }
  const auto expected = parameter_shapes(m.spec);
  const std::uint32_t count = r.u32("tensor count");
  if (count != expected.size()) {
    throw ModelFormatError("model file: " + std::to_string(count) + " tensors, architecture needs " +
                           std::to_string(expected.size()));
  }
  for (std::uint32_t t = 0; t < count; ++t) {
    std::string name = r.text("tensor name");
    const std::uint32_t rank = r.u32(name + " rank");
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(r.u32(name + " extent"));
    if (name != expected[t].first || shape != expected[t].second) {
      throw ModelFormatError("model file: tensor " + std::to_string(t) + " is " + name + to_string(shape) +
                             ", architecture expects " + expected[t].first + to_string(expected[t].second));
    }
    const std::size_t n = element_count(shape);
    if (r.remaining() / 8 < n) {
      throw ModelFormatError("model file of " + std::to_string(r.size()) + " bytes: payload of " + name +
                             " truncated: expected " +
                             std::to_string(8 * n) + " bytes, have " + std::to_string(r.remaining()));
    }
    std::vector<double> values(n);
    for (auto& v : values) v = r.f64();
    m.params.insert(std::move(name), Tensor(std::move(shape), std::move(values)));
  }
  if (r.remaining() != 0) {
    throw ModelFormatError("model file: " + std::to_string(r.remaining()) + " trailing bytes");
  }
  return m;
}

void write_model_file(const std::string& path, const Model& model) {
  write_file_atomic(path, save_model(model));
}

Model read_model_file(const std::string& path) { return load_model(read_file_bytes(path)); }

std::string describe_model(const std::vector<std::uint8_t>& bytes) {
  Reader r(bytes);
  const Header h = read_header(r, bytes);
  std::ostringstream out;
  out << "format: NNLN version " << h.version << "\n";
  out << "architecture: " << h.architecture << "\n";
  const std::uint32_t count = r.u32("tensor count");
  out << "tensors: " << count << "\n";
  std::size_t total = 0;
  for (std::uint32_t t = 0; t < count; ++t) {
    const std::string name = r.text("tensor name");
    const std::uint32_t rank = r.u32(name + " rank");
    Shape shape;
    for (std::uint32_t d = 0; d < rank; ++d) shape.push_back(r.u32(name + " extent"));
    const std::size_t n = element_count(shape);
    r.need(8 * n, name + " payload");
    for (std::size_t k = 0; k < n; ++k) r.f64();
    total += n;
    out << "  " << name << ' ' << to_string(shape) << "\n";
  }
  out << "parameters: " << total << "\n";
  return out.str();
}

Model surgery(const Model& model, const std::optional<LayerSpec>& replace_first,
              const std::optional<LayerSpec>& replace_last, bool freeze_rest, std::uint64_t seed) {
  const std::size_t L = model.spec.layers.size();
  if (L == 0) throw std::invalid_argument("surgery: empty model");
  if (L == 1 && replace_first && replace_last)
    throw std::invalid_argument("surgery: a single-layer model has one layer to replace");
  Model out;
  out.spec = model.spec;
  std::vector<bool> replaced(L, false);
  if (replace_first) {
    out.spec.layers.front() = *replace_first;
    replaced.front() = true;
  }
  if (replace_last) {
    out.spec.layers.back() = *replace_last;
    replaced.back() = true;
  }
  infer_shapes(out.spec);

  Rng rng(seed);
  const InitScheme he{InitKind::he};
  for (std::size_t i = 0; i < L; ++i) {
    if (replaced[i]) {
      for (auto& e : init_layer_params(out.spec, i, he, rng)) out.params.insert(e.name, std::move(e.value));
      continue;
    }
    const std::string prefix = std::to_string(i) + ".";
    for (const auto& e : model.params) {
      if (!e.name.starts_with(prefix)) continue;
      out.params.insert(e.name, e.value);
      if (freeze_rest || model.frozen.contains(e.name)) out.frozen.insert(e.name);
    }
  }
  const auto expected = parameter_shapes(out.spec);
  std::size_t k = 0;
  for (const auto& e : out.params) {
    if (k >= expected.size() || e.name != expected[k].first || e.value.shape() != expected[k].second)
      throw ShapeError("surgery: parameter " + e.name + " does not fit the new architecture");
    ++k;
  }
  return out;
}

}  // namespace nnl
