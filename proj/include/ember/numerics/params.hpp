#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ember/numerics/tensor.hpp"

namespace ember::num {

struct ParamInfo {
  std::string path;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

// All learnable tensors of a network, addressed by dotted path. Values and
// gradients live in two flat buffers of identical layout so that optimizers,
// reductions and checkpoints can treat the network as one vector.
class ParamStore {
 public:
  using Id = std::size_t;

  // Registers a zero-initialised parameter. Re-declaring an existing path
  // with the same shape returns the existing id.
  Id declare(std::string path, std::vector<std::size_t> shape);

  bool contains(std::string_view path) const;
  Id id(std::string_view path) const;
  const ParamInfo& info(Id id) const { return infos_[id]; }
  const std::vector<ParamInfo>& infos() const noexcept { return infos_; }
  std::size_t count() const noexcept { return infos_.size(); }
  std::size_t total_size() const noexcept { return values_.size(); }

  std::span<double> value(Id id);
  std::span<const double> value(Id id) const;
  std::span<double> grad(Id id);
  std::span<const double> grad(Id id) const;
  std::span<double> value(std::string_view path) { return value(id(path)); }
  std::span<double> grad(std::string_view path) { return grad(id(path)); }

  Tensor tensor(Id id) const;
  void set(std::string_view path, const Tensor& t);

  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& grads() noexcept { return grads_; }
  const std::vector<double>& grads() const noexcept { return grads_; }

  void zero_grads();
  void zero_values();

  // Rank-2 tensors draw from U[-sqrt(6/(fan_in+fan_out)), +sqrt(...)] in
  // declaration order from one seeded stream; rank-1 tensors (biases) are 0.
  void init_glorot(std::uint64_t seed);

  // Path of the parameter that owns flat coordinate `flat`.
  const ParamInfo& owner(std::size_t flat) const;

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.values_ == b.values_ && a.index_ == b.index_;
  }

 private:
  std::vector<ParamInfo> infos_;
  std::map<std::string, Id, std::less<>> index_;
  std::vector<double> values_;
  std::vector<double> grads_;
};

}  // namespace ember::num
