#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "ember/numerics/params.hpp"
#include "ember/numerics/tensor.hpp"

namespace ember::num {

// Handle to a value recorded on a Tape.
struct Var {
  int id = -1;
  bool valid() const noexcept { return id >= 0; }
};

// Reverse-mode differentiation over the handful of dense ops the network
// needs. One tape records one forward evaluation; `backward` accumulates
// parameter gradients into the sink given at construction (a flat buffer laid
// out like ParamStore::grads()).
//
// Rank-1 values act as column vectors in matmul.
class Tape {
 public:
  Tape() = default;
  Tape(const ParamStore& store, std::span<double> grad_sink);

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;
  Tape(Tape&&) = default;
  Tape& operator=(Tape&&) = default;

  Var constant(Tensor t);
  Var param(ParamStore::Id id);
  Var param(std::string_view path);
  // Row `row` of a matrix parameter as a vector, without copying the rest of
  // the matrix onto the tape (embedding lookup).
  Var param_row(ParamStore::Id id, std::size_t row);
  const ParamStore& store() const { return *store_; }

  const Tensor& value(Var v) const { return nodes_.at(v.id).value; }
  double scalar(Var v) const;
  // Gradient of the last backward root with respect to `v` (zeros if unused).
  Tensor grad(Var v) const;
  std::size_t size() const noexcept { return nodes_.size(); }

  void backward(Var root, double seed = 1.0);

  // ---- ops -------------------------------------------------------------
  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  // scale * a + shift
  Var affine(Var a, double scale, double shift);
  // a + scale * b
  Var add_scaled(Var a, Var b, double scale);
  // Adds the rank-1 `bias` to every column of matrix `m`.
  Var add_bias_cols(Var m, Var bias);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var transpose(Var a);
  // Reinterprets any value as a rank-1 vector of the same payload.
  Var flatten(Var a);
  Var concat(std::span<const Var> parts);
  Var concat(std::initializer_list<Var> parts) {
    return concat(std::span<const Var>(parts.begin(), parts.size()));
  }
  // Stacks rank-1 vectors of equal length as the columns of a matrix.
  Var hstack(std::span<const Var> columns);
  Var column(Var m, std::size_t j);
  Var slice(Var v, std::size_t start, std::size_t length);
  // Softmax over the entries of a vector. Positions with mask == 0 get weight
  // exactly 0; an empty mask means all positions are valid.
  Var softmax(Var v, std::span<const unsigned char> mask = {});
  // Binary cross-entropy of a scalar probability against y in {0,1}, with
  // p clamped to [clip, 1 - clip] before the log.
  Var bce(Var p, int y, double clip);

 private:
  using Backward = std::function<void(Tape&, int)>;
  struct Node {
    Tensor value;
    Tensor grad;
    Backward back;
    long param = -1;
    bool needs_grad = false;
  };

  Var push(Tensor value, bool needs_grad, Backward back);
  bool needs(Var v) const { return nodes_[v.id].needs_grad; }
  Tensor& g(int id);

  const ParamStore* store_ = nullptr;
  std::span<double> sink_;
  std::vector<Node> nodes_;
  std::vector<int> param_nodes_;
};

// Numerically stable logistic function.
double sigmoid(double x);

}  // namespace ember::num
