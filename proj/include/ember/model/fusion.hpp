#pragma once

#include <span>
#include <string>
#include <vector>

#include "ember/components.hpp"
#include "ember/model/config.hpp"
#include "ember/model/extractors.hpp"
#include "json.hpp"

namespace ember::model {

// Co-attention between two encoded components D (read first) and E.
//
//   A   = tanh(P_E^T W_m P_D)                 [Q x N]
//   H_D = tanh(W_D P_D + (W_E P_E) A)         [k x N]
//   H_E = tanh(W_E P_E + (W_D P_D) A^T)       [k x Q]
//   a_D = softmax(w_DE H_D),  a_E = softmax(w_ED H_E)
//   O_D_E = P_D a_D,  O_E_D = P_E a_E,  O_DE = [O_D_E; O_E_D]
struct CoAttentionOutput {
  ComponentPair pair;
  num::Var affinity;  // A
  num::Var a_d;
  num::Var a_e;
  num::Var o_d_e;
  num::Var o_e_d;
  num::Var o_de;
};

std::string coattention_prefix(const ComponentPair& pair);

// Parameters for one pair: W_m [w x w], W_D and W_E [k x w], w_DE and w_ED [1 x k].
void declare_coattention(num::ParamStore& store, const std::string& prefix,
                         std::size_t width, std::size_t k);

CoAttentionOutput co_attention(num::Tape& t, const std::string& prefix,
                               const EncodedComponent& d, const EncodedComponent& e);

void declare_fusion(num::ParamStore& store, const ModelConfig& cfg);

// Reduces the pair sequence to Fea_gru. The default aggregator runs a GRU
// over the sequence from its last element to its first.
num::Var aggregate(num::Tape& t, Aggregator kind, std::span<const num::Var> sequence);

// Concatenation of the last-read component's enhanced representation from
// every pair it takes part in, ordered by the partner's reading rank. Returns
// an invalid Var when no such pair is active.
num::Var refinement_features(num::Tape& t, std::span<const CoAttentionOutput> outputs,
                             const ReadingOrder& order);

// Affinity matrices and attention vectors of every pair, as plain numbers.
nlohmann::json coattention_diagnostics(const num::Tape& t,
                                       std::span<const CoAttentionOutput> outputs);

}  // namespace ember::model
