#include "nnl/params.hpp"

namespace nnl {

void TensorMap::insert(std::string name, Tensor value) {
  if (index_.contains(name)) throw std::invalid_argument("TensorMap: duplicate name " + name);
  index_.emplace(name, entries_.size());
  entries_.push_back({std::move(name), std::move(value)});
}

bool TensorMap::contains(std::string_view name) const {
  return index_.contains(std::string(name));
}

Tensor& TensorMap::operator[](std::string_view name) {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("TensorMap: no entry " + std::string(name));
  return entries_[it->second].value;
}

const Tensor& TensorMap::operator[](std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) throw std::out_of_range("TensorMap: no entry " + std::string(name));
  return entries_[it->second].value;
}

std::size_t TensorMap::element_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.value.size();
  return n;
}

TensorMap TensorMap::zeros_like() const {
  TensorMap out;
  for (const auto& e : entries_) out.insert(e.name, Tensor(e.value.shape()));
  return out;
}

bool TensorMap::mirrors(const TensorMap& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != other.entries_[i].name) return false;
    if (entries_[i].value.shape() != other.entries_[i].value.shape()) return false;
  }
  return true;
}

void require_mirror(const ParamSet& params, const GradSet& grads, const char* where) {
  if (!params.mirrors(grads)) {
    std::string msg = std::string(where) + ": gradient keys/shapes do not mirror parameters [";
    for (const auto& e : params) msg += " " + e.name + to_string(e.value.shape());
    msg += " ] vs [";
    for (const auto& e : grads) msg += " " + e.name + to_string(e.value.shape());
    throw ShapeError(msg + " ]");
  }
}

TensorMap select_prefix(const TensorMap& map, std::string_view prefix) {
  TensorMap out;
  for (const auto& e : map) {
    if (e.name.starts_with(prefix)) out.insert(e.name.substr(prefix.size()), e.value);
  }
  return out;
}

void merge_prefixed(TensorMap& target, const TensorMap& local, std::string_view prefix) {
  for (const auto& e : local) target.insert(std::string(prefix) + e.name, e.value);
}

std::string_view local_name(std::string_view name) {
  const auto dot = name.rfind('.');
  return dot == std::string_view::npos ? name : name.substr(dot + 1);
}

bool is_bias_name(std::string_view name) {
  const auto local = local_name(name);
  return !local.empty() && local.front() == 'b';
}

}  // namespace nnl
