#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ember/numerics/params.hpp"
#include "ember/numerics/tape.hpp"

namespace ember::num {

enum class CellKind { Gru, Lstm };

// ---- parameter declaration ------------------------------------------------
//
// GRU:  z = s(W_z x + U_z h + b_z)          update gate
//       r = s(W_r x + U_r h + b_r)          reset gate
//       n = tanh(W_n x + U_n (r*h) + b_n)   candidate
//       h' = (1 - z) * n + z * h
//
// LSTM: i, f, o = s(W_* x + U_* h + b_*), g = tanh(W_g x + U_g h + b_g)
//       c' = f * c + i * g,  h' = o * tanh(c')

void declare_cell(ParamStore& store, const std::string& prefix, CellKind kind,
                  std::size_t in_dim, std::size_t hidden);
// Two cells under "<prefix>.fwd" and "<prefix>.bwd".
void declare_bidirectional(ParamStore& store, const std::string& prefix,
                           CellKind kind, std::size_t in_dim, std::size_t hidden);
// Additive attention: W [a x m], b [a], U [1 x a].
void declare_attention(ParamStore& store, const std::string& prefix,
                       std::size_t in_dim, std::size_t attn_dim);
// Two-layer perceptron: in -> hidden (tanh) -> 1 (sigmoid).
void declare_mlp(ParamStore& store, const std::string& prefix, std::size_t in_dim,
                 std::size_t hidden);

// ---- differentiable layers ------------------------------------------------

Var gru_cell(Tape& t, const std::string& prefix, Var x, Var h_prev);

struct LstmState {
  Var h;
  Var c;
};
LstmState lstm_cell(Tape& t, const std::string& prefix, Var x, LstmState prev);

// Runs a cell from the zero state over `seq`; returns every hidden state.
std::vector<Var> unidirectional_encode(Tape& t, const std::string& prefix,
                                       CellKind kind, std::span<const Var> seq);

// Element t of the result is concat(forward_state_t, backward_state_t).
std::vector<Var> bidirectional_encode(Tape& t, const std::string& prefix,
                                      CellKind kind, std::span<const Var> seq);

struct AttentionPool {
  Var weights;  // [n]
  Var pooled;   // [m]
};
// weights = softmax_i(U tanh(W h_i + b)), pooled = sum_i weights_i h_i.
AttentionPool additive_attention_pool(Tape& t, const std::string& prefix,
                                      std::span<const Var> items,
                                      std::span<const unsigned char> mask = {});

// Returns the output probability as a scalar.
Var mlp_probability(Tape& t, const std::string& prefix, Var x);

inline constexpr double kProbabilityClip = 1e-7;

// Plain-value form used outside the tape; mirrors Tape::bce.
double cross_entropy(double p, int y, double clip = kProbabilityClip);

// Zero initial hidden state of a cell.
Var zero_state(Tape& t, std::size_t hidden);
std::size_t cell_hidden(const ParamStore& store, const std::string& prefix);

}  // namespace ember::num
