#include "ember/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ember/error.hpp"

namespace ember::num {

std::size_t shape_product(const std::vector<std::size_t>& shape) {
  std::size_t n = 1;
  for (auto e : shape) n *= e;
  return shape.empty() ? 0 : n;
}

Tensor::Tensor(std::vector<std::size_t> shape, double fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {
  if (shape_.empty() || shape_.size() > 2)
    throw DimensionError("tensor rank must be 1 or 2");
}

Tensor::Tensor(std::vector<std::size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (shape_.empty() || shape_.size() > 2)
    throw DimensionError("tensor rank must be 1 or 2");
  if (shape_product(shape_) != data_.size())
    throw DimensionError("tensor payload of " + std::to_string(data_.size()) +
                         " values does not match shape " + shape_string());
}

Tensor Tensor::vector(std::vector<double> values) {
  const auto n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols,
                      std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

std::vector<float> Tensor::to_float32() const {
  return {data_.begin(), data_.end()};
}

std::string Tensor::shape_string() const {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) os << 'x';
    os << shape_[i];
  }
  os << ']';
  return os.str();
}

}  // namespace ember::num
