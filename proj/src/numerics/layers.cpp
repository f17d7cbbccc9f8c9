#include "ember/numerics/layers.hpp"

#include <algorithm>
#include <cmath>

#include "ember/error.hpp"

namespace ember::num {

namespace {

constexpr const char* kGruGates[] = {"z", "r", "n"};
constexpr const char* kLstmGates[] = {"i", "f", "o", "g"};

// W x + U h + b for one gate.
Var gate_preact(Tape& t, const std::string& prefix, const char* gate, Var x, Var h) {
  const std::string g(gate);
  Var wx = t.matmul(t.param(prefix + ".W_" + g), x);
  Var uh = t.matmul(t.param(prefix + ".U_" + g), h);
  return t.add(t.add(wx, uh), t.param(prefix + ".b_" + g));
}

}  // namespace

void declare_cell(ParamStore& store, const std::string& prefix, CellKind kind,
                  std::size_t in_dim, std::size_t hidden) {
  auto declare_gate = [&](const char* g) {
    store.declare(prefix + ".W_" + g, {hidden, in_dim});
    store.declare(prefix + ".U_" + g, {hidden, hidden});
    store.declare(prefix + ".b_" + g, {hidden});
  };
  if (kind == CellKind::Gru) {
    for (auto g : kGruGates) declare_gate(g);
  } else {
    for (auto g : kLstmGates) declare_gate(g);
  }
}

void declare_bidirectional(ParamStore& store, const std::string& prefix,
                           CellKind kind, std::size_t in_dim, std::size_t hidden) {
  declare_cell(store, prefix + ".fwd", kind, in_dim, hidden);
  declare_cell(store, prefix + ".bwd", kind, in_dim, hidden);
}

void declare_attention(ParamStore& store, const std::string& prefix,
                       std::size_t in_dim, std::size_t attn_dim) {
  store.declare(prefix + ".W", {attn_dim, in_dim});
  store.declare(prefix + ".b", {attn_dim});
  store.declare(prefix + ".U", {1, attn_dim});
}

void declare_mlp(ParamStore& store, const std::string& prefix, std::size_t in_dim,
                 std::size_t hidden) {
  store.declare(prefix + ".W1", {hidden, in_dim});
  store.declare(prefix + ".b1", {hidden});
  store.declare(prefix + ".W2", {1, hidden});
  store.declare(prefix + ".b2", {1});
}

std::size_t cell_hidden(const ParamStore& store, const std::string& prefix) {
  for (auto gate : {".U_z", ".U_i"}) {
    const std::string path = prefix + gate;
    if (store.contains(path)) return store.info(store.id(path)).shape[0];
  }
  throw ConfigError("no recurrent cell declared at " + prefix);
}

Var zero_state(Tape& t, std::size_t hidden) {
  return t.constant(Tensor({hidden}, 0.0));
}

Var gru_cell(Tape& t, const std::string& prefix, Var x, Var h_prev) {
  const auto& W = t.value(t.param(prefix + ".W_z"));
  if (t.value(x).size() != W.cols())
    throw DimensionError(prefix + ": input of width " +
                         std::to_string(t.value(x).size()) + ", cell expects " +
                         std::to_string(W.cols()));
  if (t.value(h_prev).size() != W.rows())
    throw DimensionError(prefix + ": hidden state width mismatch");
  Var z = t.sigmoid(gate_preact(t, prefix, "z", x, h_prev));
  Var r = t.sigmoid(gate_preact(t, prefix, "r", x, h_prev));
  Var wx = t.matmul(t.param(prefix + ".W_n"), x);
  Var urh = t.matmul(t.param(prefix + ".U_n"), t.mul(r, h_prev));
  Var n = t.tanh(t.add(t.add(wx, urh), t.param(prefix + ".b_n")));
  // (1 - z) * n + z * h = n + z * (h - n)
  return t.add(n, t.mul(z, t.sub(h_prev, n)));
}

LstmState lstm_cell(Tape& t, const std::string& prefix, Var x, LstmState prev) {
  const auto& W = t.value(t.param(prefix + ".W_i"));
  if (t.value(x).size() != W.cols())
    throw DimensionError(prefix + ": input of width " +
                         std::to_string(t.value(x).size()) + ", cell expects " +
                         std::to_string(W.cols()));
  if (t.value(prev.h).size() != W.rows() || t.value(prev.c).size() != W.rows())
    throw DimensionError(prefix + ": state width mismatch");
  Var i = t.sigmoid(gate_preact(t, prefix, "i", x, prev.h));
  Var f = t.sigmoid(gate_preact(t, prefix, "f", x, prev.h));
  Var o = t.sigmoid(gate_preact(t, prefix, "o", x, prev.h));
  Var g = t.tanh(gate_preact(t, prefix, "g", x, prev.h));
  Var c = t.add(t.mul(f, prev.c), t.mul(i, g));
  Var h = t.mul(o, t.tanh(c));
  return {h, c};
}

std::vector<Var> unidirectional_encode(Tape& t, const std::string& prefix,
                                       CellKind kind, std::span<const Var> seq) {
  if (seq.empty()) throw EmptyInputError(prefix + ": empty input sequence");
  const std::size_t hidden = cell_hidden(t.store(), prefix);
  std::vector<Var> out;
  out.reserve(seq.size());
  if (kind == CellKind::Gru) {
    Var h = zero_state(t, hidden);
    for (Var x : seq) out.push_back(h = gru_cell(t, prefix, x, h));
  } else {
    LstmState s{zero_state(t, hidden), zero_state(t, hidden)};
    for (Var x : seq) {
      s = lstm_cell(t, prefix, x, s);
      out.push_back(s.h);
    }
  }
  return out;
}

std::vector<Var> bidirectional_encode(Tape& t, const std::string& prefix,
                                      CellKind kind, std::span<const Var> seq) {
  if (seq.empty()) throw EmptyInputError(prefix + ": empty input sequence");
  auto fwd = unidirectional_encode(t, prefix + ".fwd", kind, seq);
  std::vector<Var> reversed(seq.rbegin(), seq.rend());
  auto bwd = unidirectional_encode(t, prefix + ".bwd", kind, reversed);
  std::reverse(bwd.begin(), bwd.end());
  std::vector<Var> out;
  out.reserve(seq.size());
  for (std::size_t i = 0; i < seq.size(); ++i) out.push_back(t.concat({fwd[i], bwd[i]}));
  return out;
}

AttentionPool additive_attention_pool(Tape& t, const std::string& prefix,
                                      std::span<const Var> items,
                                      std::span<const unsigned char> mask) {
  if (items.empty()) throw EmptyInputError(prefix + ": attention over nothing");
  Var H = t.hstack(items);  // [m x n]
  Var u = t.tanh(t.add_bias_cols(t.matmul(t.param(prefix + ".W"), H),
                                 t.param(prefix + ".b")));  // [a x n]
  Var scores = t.flatten(t.matmul(t.param(prefix + ".U"), u));  // [n]
  Var weights = t.softmax(scores, mask);
  return {weights, t.matmul(H, weights)};
}

Var mlp_probability(Tape& t, const std::string& prefix, Var x) {
  Var hidden = t.tanh(t.add(t.matmul(t.param(prefix + ".W1"), x),
                            t.param(prefix + ".b1")));
  Var logit = t.add(t.flatten(t.matmul(t.param(prefix + ".W2"), hidden)),
                    t.param(prefix + ".b2"));
  return t.sigmoid(logit);
}

double cross_entropy(double p, int y, double clip) {
  if (y != 0 && y != 1) throw LabelError("label must be 0 or 1, got " + std::to_string(y));
  const double q = std::clamp(p, clip, 1.0 - clip);
  return y == 1 ? -std::log(q) : -std::log(1.0 - q);
}

}  // namespace ember::num
