#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "nnl/network.hpp"
#include "nnl/optim.hpp"
#include "nnl/params.hpp"

namespace nnl {

/// A network architecture with its parameters. `frozen` lists parameters the
/// optimizer must leave alone; it lives only in memory and is not saved.
struct Model {
  NetworkSpec spec;
  ParamSet params;
  FrozenSet frozen;
};

class ModelFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr char kModelMagic[4] = {'N', 'N', 'L', 'N'};
inline constexpr std::uint32_t kModelVersion = 1;

/// Little-endian layout:
///   "NNLN", u32 version,
///   u32 length + UTF-8 architecture text (format_network),
///   u32 tensor count, then per tensor:
///     u32 length + name, u32 rank, rank x u32 extents, f64 values.
/// Throws std::invalid_argument on non-finite parameters.
std::vector<std::uint8_t> save_model(const Model& model);
/// Checks magic, version, lengths and that the tensors match the architecture.
Model load_model(const std::vector<std::uint8_t>& bytes);

void write_model_file(const std::string& path, const Model& model);
Model read_model_file(const std::string& path);

/// Header summary: version, architecture text and tensor names and shapes.
std::string describe_model(const std::vector<std::uint8_t>& bytes);

/// Transfer learning: optionally swaps the first and/or last layer for a new
/// He-initialized one, keeping every other tensor bit for bit. With
/// freeze_rest the kept tensors go into the returned model's frozen set.
/// The input model is never modified.
Model surgery(const Model& model, const std::optional<LayerSpec>& replace_first,
              const std::optional<LayerSpec>& replace_last, bool freeze_rest, std::uint64_t seed);

}  // namespace nnl
