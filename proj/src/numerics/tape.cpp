#include "ember/numerics/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ember/error.hpp"

namespace ember::num {

namespace {

std::size_t rows_of(const Tensor& t) { return t.rows(); }
std::size_t cols_of(const Tensor& t) { return t.cols(); }

// out(m x p) += a(m x n) * b(n x p), with optional transposes of a or b.
void gemm_acc(const double* a, const double* b, double* out, std::size_t m,
              std::size_t n, std::size_t p, bool ta, bool tb) {
  for (std::size_t i = 0; i < m; ++i) {
    double* orow = out + i * p;
    for (std::size_t k = 0; k < n; ++k) {
      const double aik = ta ? a[k * m + i] : a[i * n + k];
      if (aik == 0.0) continue;
      if (!tb) {
        const double* brow = b + k * p;
        for (std::size_t j = 0; j < p; ++j) orow[j] += aik * brow[j];
      } else {
        for (std::size_t j = 0; j < p; ++j) orow[j] += aik * b[j * n + k];
      }
    }
  }
}

std::vector<std::size_t> shape_like(std::size_t r, std::size_t c, bool vec) {
  if (vec) return {r};
  return {r, c};
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tape::Tape(const ParamStore& store, std::span<double> grad_sink)
    : store_(&store), sink_(grad_sink), param_nodes_(store.count(), -1) {
  if (!sink_.empty() && sink_.size() != store.total_size())
    throw DimensionError("gradient sink does not match parameter layout");
}

Var Tape::push(Tensor value, bool needs_grad, Backward back) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = needs_grad;
  if (needs_grad) n.back = std::move(back);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size() - 1)};
}

Tensor& Tape::g(int id) {
  Node& n = nodes_[id];
  if (n.grad.size() != n.value.size()) n.grad = Tensor(n.value.shape(), 0.0);
  return n.grad;
}

Var Tape::constant(Tensor t) { return push(std::move(t), false, nullptr); }

Var Tape::param(ParamStore::Id id) {
  if (!store_) throw ConfigError("tape has no parameter store");
  if (param_nodes_[id] >= 0) return Var{param_nodes_[id]};
  Var v = push(store_->tensor(id), true, nullptr);
  nodes_[v.id].param = static_cast<long>(id);
  param_nodes_[id] = v.id;
  return v;
}

Var Tape::param(std::string_view path) {
  if (!store_) throw ConfigError("tape has no parameter store");
  return param(store_->id(path));
}

Var Tape::param_row(ParamStore::Id id, std::size_t row) {
  if (!store_) throw ConfigError("tape has no parameter store");
  const auto& info = store_->info(id);
  if (info.shape.size() != 2 || row >= info.shape[0])
    throw DimensionError("row " + std::to_string(row) + " out of range for " + info.path);
  const std::size_t c = info.shape[1];
  const std::size_t offset = info.offset + row * c;
  const auto& values = store_->values();
  Tensor out({c}, std::vector<double>(values.begin() + static_cast<std::ptrdiff_t>(offset),
                                      values.begin() + static_cast<std::ptrdiff_t>(offset + c)));
  return push(std::move(out), true, [offset](Tape& t, int self) {
    if (t.sink_.empty()) return;
    const Tensor& G = t.nodes_[self].grad;
    for (std::size_t k = 0; k < G.size(); ++k) t.sink_[offset + k] += G[k];
  });
}

double Tape::scalar(Var v) const {
  const auto& t = value(v);
  if (t.size() != 1) throw DimensionError("value is not a scalar");
  return t[0];
}

Tensor Tape::grad(Var v) const {
  const Node& n = nodes_.at(v.id);
  if (n.grad.size() == n.value.size()) return n.grad;
  return Tensor(n.value.shape(), 0.0);
}

void Tape::backward(Var root, double seed) {
  for (auto& n : nodes_) n.grad = Tensor();
  if (!needs(root)) return;
  if (value(root).size() != 1) throw DimensionError("backward root must be scalar");
  g(root.id)[0] = seed;
  for (int i = root.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.needs_grad || n.grad.size() == 0) continue;
    if (n.param >= 0) {
      if (!sink_.empty()) {
        const auto& info = store_->info(static_cast<std::size_t>(n.param));
        for (std::size_t k = 0; k < info.size; ++k)
          sink_[info.offset + k] += n.grad[k];
      }
      continue;
    }
    if (n.back) n.back(*this, i);
  }
}

// ---- ops -----------------------------------------------------------------

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  const std::size_t m = rows_of(A), n = cols_of(A), p = cols_of(B);
  if (rows_of(B) != n)
    throw DimensionError("matmul " + A.shape_string() + " x " + B.shape_string());
  Tensor out(shape_like(m, p, B.shape().size() == 1), 0.0);
  gemm_acc(A.data().data(), B.data().data(), out.data().data(), m, n, p, false,
           false);
  return push(std::move(out), needs(a) || needs(b), [a, b, m, n, p](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.needs(a)) {
      // dA(m x n) += G(m x p) * B^T
      gemm_acc(G.data().data(), t.value(b).data().data(),
               t.g(a.id).data().data(), m, p, n, false, true);
    }
    if (t.needs(b)) {
      // dB(n x p) += A^T * G
      gemm_acc(t.value(a).data().data(), G.data().data(),
               t.g(b.id).data().data(), n, m, p, true, false);
    }
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.size() != B.size() || rows_of(A) != rows_of(B))
    throw DimensionError("add " + A.shape_string() + " + " + B.shape_string());
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    for (Var v : {a, b}) {
      if (!t.needs(v)) continue;
      Tensor& d = t.g(v.id);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
    }
  });
}

Var Tape::sub(Var a, Var b) { return add_scaled(a, b, -1.0); }

Var Tape::add_scaled(Var a, Var b, double scale) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.size() != B.size())
    throw DimensionError("add_scaled " + A.shape_string() + " + " + B.shape_string());
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * B[i];
  return push(std::move(out), needs(a) || needs(b), [a, b, scale](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.needs(a)) {
      Tensor& d = t.g(a.id);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
    }
    if (t.needs(b)) {
      Tensor& d = t.g(b.id);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += scale * G[i];
    }
  });
}

Var Tape::mul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  if (A.size() != B.size())
    throw DimensionError("mul " + A.shape_string() + " * " + B.shape_string());
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return push(std::move(out), needs(a) || needs(b), [a, b](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.needs(a)) {
      Tensor& d = t.g(a.id);
      const Tensor& Bv = t.value(b);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i] * Bv[i];
    }
    if (t.needs(b)) {
      Tensor& d = t.g(b.id);
      const Tensor& Av = t.value(a);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i] * Av[i];
    }
  });
}

Var Tape::affine(Var a, double scale, double shift) {
  Tensor out = value(a);
  for (auto& x : out.data()) x = scale * x + shift;
  return push(std::move(out), needs(a), [a, scale](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.g(a.id);
    for (std::size_t i = 0; i < G.size(); ++i) d[i] += scale * G[i];
  });
}

Var Tape::add_bias_cols(Var m, Var bias) {
  const Tensor& M = value(m);
  const Tensor& b = value(bias);
  const std::size_t r = rows_of(M), c = cols_of(M);
  if (b.size() != r)
    throw DimensionError("bias " + b.shape_string() + " for " + M.shape_string());
  Tensor out = M;
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[i * c + j] += b[i];
  return push(std::move(out), needs(m) || needs(bias), [m, bias, r, c](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    if (t.needs(m)) {
      Tensor& d = t.g(m.id);
      for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
    }
    if (t.needs(bias)) {
      Tensor& d = t.g(bias.id);
      for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) d[i] += G[i * c + j];
    }
  });
}

Var Tape::tanh(Var a) {
  Tensor out = value(a);
  for (auto& x : out.data()) x = std::tanh(x);
  return push(std::move(out), needs(a), [a](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    Tensor& d = t.g(a.id);
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      d[i] += n.grad[i] * (1.0 - n.value[i] * n.value[i]);
  });
}

Var Tape::sigmoid(Var a) {
  Tensor out = value(a);
  for (auto& x : out.data()) x = num::sigmoid(x);
  return push(std::move(out), needs(a), [a](Tape& t, int self) {
    const Node& n = t.nodes_[self];
    Tensor& d = t.g(a.id);
    for (std::size_t i = 0; i < n.grad.size(); ++i)
      d[i] += n.grad[i] * n.value[i] * (1.0 - n.value[i]);
  });
}

Var Tape::transpose(Var a) {
  const Tensor& A = value(a);
  const std::size_t r = rows_of(A), c = cols_of(A);
  Tensor out({c, r}, 0.0);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) out[j * r + i] = A[i * c + j];
  return push(std::move(out), needs(a), [a, r, c](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.g(a.id);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) d[i * c + j] += G[j * r + i];
  });
}

Var Tape::flatten(Var a) {
  const Tensor& A = value(a);
  Tensor out({A.size()}, std::vector<double>(A.data().begin(), A.data().end()));
  return push(std::move(out), needs(a), [a](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.g(a.id);
    for (std::size_t i = 0; i < G.size(); ++i) d[i] += G[i];
  });
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw EmptyInputError("concat of nothing");
  std::vector<double> data;
  std::vector<std::pair<Var, std::size_t>> offsets;
  bool any = false;
  for (Var p : parts) {
    const Tensor& v = value(p);
    offsets.emplace_back(p, data.size());
    data.insert(data.end(), v.data().begin(), v.data().end());
    any = any || needs(p);
  }
  const auto n = data.size();
  return push(Tensor({n}, std::move(data)), any, [offsets](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    for (auto [p, off] : offsets) {
      if (!t.needs(p)) continue;
      Tensor& d = t.g(p.id);
      for (std::size_t i = 0; i < d.size(); ++i) d[i] += G[off + i];
    }
  });
}

Var Tape::hstack(std::span<const Var> columns) {
  if (columns.empty()) throw EmptyInputError("hstack of nothing");
  const std::size_t m = value(columns[0]).size();
  const std::size_t n = columns.size();
  Tensor out({m, n}, 0.0);
  bool any = false;
  for (std::size_t j = 0; j < n; ++j) {
    const Tensor& v = value(columns[j]);
    if (v.size() != m) throw DimensionError("hstack of vectors with unequal length");
    for (std::size_t i = 0; i < m; ++i) out[i * n + j] = v[i];
    any = any || needs(columns[j]);
  }
  std::vector<Var> cols(columns.begin(), columns.end());
  return push(std::move(out), any, [cols, m, n](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    for (std::size_t j = 0; j < n; ++j) {
      if (!t.needs(cols[j])) continue;
      Tensor& d = t.g(cols[j].id);
      for (std::size_t i = 0; i < m; ++i) d[i] += G[i * n + j];
    }
  });
}

Var Tape::column(Var m, std::size_t j) {
  const Tensor& M = value(m);
  const std::size_t r = rows_of(M), c = cols_of(M);
  if (j >= c) throw DimensionError("column index out of range");
  Tensor out({r}, 0.0);
  for (std::size_t i = 0; i < r; ++i) out[i] = M[i * c + j];
  return push(std::move(out), needs(m), [m, j, r, c](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.g(m.id);
    for (std::size_t i = 0; i < r; ++i) d[i * c + j] += G[i];
  });
}

Var Tape::slice(Var v, std::size_t start, std::size_t length) {
  const Tensor& V = value(v);
  if (start + length > V.size()) throw DimensionError("slice out of range");
  Tensor out({length}, std::vector<double>(V.data().begin() + start,
                                            V.data().begin() + start + length));
  return push(std::move(out), needs(v), [v, start](Tape& t, int self) {
    const Tensor& G = t.nodes_[self].grad;
    Tensor& d = t.g(v.id);
    for (std::size_t i = 0; i < G.size(); ++i) d[start + i] += G[i];
  });
}

Var Tape::softmax(Var v, std::span<const unsigned char> mask) {
  const Tensor& V = value(v);
  const std::size_t n = V.size();
  if (n == 0) throw EmptyInputError("softmax of an empty vector");
  if (!mask.empty() && mask.size() != n)
    throw DimensionError("softmax mask length mismatch");
  auto valid = [&](std::size_t i) { return mask.empty() || mask[i] != 0; };
  double mx = -INFINITY;
  for (std::size_t i = 0; i < n; ++i)
    if (valid(i)) mx = std::max(mx, V[i]);
  if (!std::isfinite(mx)) throw NumericError("softmax with no valid position");
  Tensor out({n}, 0.0);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!valid(i)) continue;
    out[i] = std::exp(V[i] - mx);
    sum += out[i];
  }
  for (auto& x : out.data()) x /= sum;
  return push(std::move(out), needs(v), [v](Tape& t, int self) {
    const Node& node = t.nodes_[self];
    const Tensor& y = node.value;
    const Tensor& G = node.grad;
    double dot = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) dot += G[i] * y[i];
    Tensor& d = t.g(v.id);
    for (std::size_t i = 0; i < y.size(); ++i) d[i] += y[i] * (G[i] - dot);
  });
}

Var Tape::bce(Var p, int y, double clip) {
  if (y != 0 && y != 1) throw LabelError("label must be 0 or 1, got " + std::to_string(y));
  const double raw = scalar(p);
  const bool clipped = raw < clip || raw > 1.0 - clip;
  const double q = std::clamp(raw, clip, 1.0 - clip);
  const double loss = y == 1 ? -std::log(q) : -std::log(1.0 - q);
  return push(Tensor({1}, std::vector<double>{loss}), needs(p),
              [p, y, q, clipped](Tape& t, int self) {
                if (clipped) return;
                const double G = t.nodes_[self].grad[0];
                t.g(p.id)[0] += G * (y == 1 ? -1.0 / q : 1.0 / (1.0 - q));
              });
}

}  // namespace ember::num
