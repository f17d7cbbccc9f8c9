#include "ember/numerics/params.hpp"

#include <algorithm>
#include <cmath>

#include "ember/error.hpp"
#include "ember/numerics/rng.hpp"

namespace ember::num {

ParamStore::Id ParamStore::declare(std::string path,
                                   std::vector<std::size_t> shape) {
  if (auto it = index_.find(path); it != index_.end()) {
    if (infos_[it->second].shape != shape)
      throw DimensionError("parameter " + path + " redeclared with a new shape");
    return it->second;
  }
  if (shape.empty() || shape.size() > 2)
    throw DimensionError("parameter " + path + " must have rank 1 or 2");
  ParamInfo info;
  info.path = path;
  info.shape = std::move(shape);
  info.offset = values_.size();
  info.size = shape_product(info.shape);
  values_.resize(values_.size() + info.size, 0.0);
  grads_.resize(values_.size(), 0.0);
  const Id id = infos_.size();
  index_.emplace(std::move(path), id);
  infos_.push_back(std::move(info));
  return id;
}

bool ParamStore::contains(std::string_view path) const {
  return index_.find(path) != index_.end();
}

ParamStore::Id ParamStore::id(std::string_view path) const {
  auto it = index_.find(path);
  if (it == index_.end())
    throw ConfigError("unknown parameter path: " + std::string(path));
  return it->second;
}

std::span<double> ParamStore::value(Id id) {
  const auto& i = infos_.at(id);
  return {values_.data() + i.offset, i.size};
}
std::span<const double> ParamStore::value(Id id) const {
  const auto& i = infos_.at(id);
  return {values_.data() + i.offset, i.size};
}
std::span<double> ParamStore::grad(Id id) {
  const auto& i = infos_.at(id);
  return {grads_.data() + i.offset, i.size};
}
std::span<const double> ParamStore::grad(Id id) const {
  const auto& i = infos_.at(id);
  return {grads_.data() + i.offset, i.size};
}

Tensor ParamStore::tensor(Id id) const {
  auto v = value(id);
  return Tensor(infos_[id].shape, std::vector<double>(v.begin(), v.end()));
}

void ParamStore::set(std::string_view path, const Tensor& t) {
  const Id i = id(path);
  if (t.shape() != infos_[i].shape)
    throw DimensionError("shape mismatch assigning " + std::string(path) +
                         ": expected " + Tensor(infos_[i].shape).shape_string() +
                         ", got " + t.shape_string());
  std::copy(t.data().begin(), t.data().end(), value(i).begin());
}

void ParamStore::zero_grads() { std::fill(grads_.begin(), grads_.end(), 0.0); }
void ParamStore::zero_values() { std::fill(values_.begin(), values_.end(), 0.0); }

void ParamStore::init_glorot(std::uint64_t seed) {
  Rng rng(seed);
  for (const auto& info : infos_) {
    auto v = value(index_.find(info.path)->second);
    if (info.shape.size() == 1) {
      std::fill(v.begin(), v.end(), 0.0);
      continue;
    }
    const double fan_out = static_cast<double>(info.shape[0]);
    const double fan_in = static_cast<double>(info.shape[1]);
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (auto& x : v) x = rng.uniform(-limit, limit);
  }
}

const ParamInfo& ParamStore::owner(std::size_t flat) const {
  auto it = std::upper_bound(
      infos_.begin(), infos_.end(), flat,
      [](std::size_t f, const ParamInfo& p) { return f < p.offset; });
  if (it == infos_.begin()) throw DimensionError("coordinate out of range");
  return *std::prev(it);
}

}  // namespace ember::num
