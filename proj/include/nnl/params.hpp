#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "nnl/tensor.hpp"

namespace nnl {

/// Ordered collection of named tensors. Iteration follows insertion order,
/// which fixes the reduction order of every sum taken over a ParamSet.
class TensorMap {
 public:
  struct Entry {
    std::string name;
    Tensor value;
    bool operator==(const Entry&) const = default;
  };

  void insert(std::string name, Tensor value);
  bool contains(std::string_view name) const;
  Tensor& operator[](std::string_view name);
  const Tensor& operator[](std::string_view name) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  std::size_t element_count() const;

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Same keys and shapes, every entry zero.
  TensorMap zeros_like() const;

  /// True when `other` has identical keys in identical order with equal shapes.
  bool mirrors(const TensorMap& other) const;

  bool operator==(const TensorMap& other) const { return entries_ == other.entries_; }

 private:
  std::vector<Entry> entries_;
  std::unordered_map<std::string, std::size_t> index_;
};

using ParamSet = TensorMap;
using GradSet = TensorMap;

/// Throws ShapeError unless `grads` mirrors `params`.
void require_mirror(const ParamSet& params, const GradSet& grads, const char* where);

/// Entries whose names start with `prefix`, renamed without it ("2.W" -> "W").
TensorMap select_prefix(const TensorMap& map, std::string_view prefix);
/// Every entry of `local` inserted into `target` as prefix + name.
void merge_prefixed(TensorMap& target, const TensorMap& local, std::string_view prefix);

/// Local part of a parameter name ("3.b_r" -> "b_r").
std::string_view local_name(std::string_view name);

/// Bias-like tensors: local names starting with 'b'.
bool is_bias_name(std::string_view name);

}  // namespace nnl
