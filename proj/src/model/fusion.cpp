#include "ember/model/fusion.hpp"

#include <algorithm>

#include "ember/error.hpp"
#include "ember/numerics/layers.hpp"

namespace ember::model {

using num::Tape;
using num::Var;

std::string coattention_prefix(const ComponentPair& pair) { return "coatt." + pair.letters(); }

void declare_coattention(num::ParamStore& store, const std::string& prefix, std::size_t width,
                         std::size_t k) {
  store.declare(prefix + ".W_m", {width, width});
  store.declare(prefix + ".W_D", {k, width});
  store.declare(prefix + ".W_E", {k, width});
  store.declare(prefix + ".w_DE", {1, k});
  store.declare(prefix + ".w_ED", {1, k});
}

CoAttentionOutput co_attention(Tape& t, const std::string& prefix, const EncodedComponent& d,
                               const EncodedComponent& e) {
  if (d.vectors.empty() || e.vectors.empty())
    throw EmptyInputError(prefix + ": empty component sequence");
  const Var p_d = t.hstack(d.vectors);
  const Var p_e = t.hstack(e.vectors);
  const Var w_m = t.param(prefix + ".W_m");
  if (t.value(p_d).rows() != t.value(w_m).cols() || t.value(p_e).rows() != t.value(w_m).rows())
    throw DimensionError(prefix + ": component widths " + std::to_string(t.value(p_d).rows()) +
                         " and " + std::to_string(t.value(p_e).rows()) + " do not match W_m " +
                         t.value(w_m).shape_string());

  CoAttentionOutput out;
  out.affinity = t.tanh(t.matmul(t.transpose(p_e), t.matmul(w_m, p_d)));
  const Var wd_pd = t.matmul(t.param(prefix + ".W_D"), p_d);
  const Var we_pe = t.matmul(t.param(prefix + ".W_E"), p_e);
  const Var h_d = t.tanh(t.add(wd_pd, t.matmul(we_pe, out.affinity)));
  const Var h_e = t.tanh(t.add(we_pe, t.matmul(wd_pd, t.transpose(out.affinity))));
  out.a_d = t.softmax(t.flatten(t.matmul(t.param(prefix + ".w_DE"), h_d)), d.mask);
  out.a_e = t.softmax(t.flatten(t.matmul(t.param(prefix + ".w_ED"), h_e)), e.mask);
  out.o_d_e = t.matmul(p_d, out.a_d);
  out.o_e_d = t.matmul(p_e, out.a_e);
  out.o_de = t.concat({out.o_d_e, out.o_e_d});
  out.pair = ComponentPair{d.kind, e.kind};
  return out;
}

void declare_fusion(num::ParamStore& store, const ModelConfig& cfg) {
  for (const auto& p : cfg.active_pairs())
    declare_coattention(store, coattention_prefix(p), cfg.width(), cfg.k());
  const std::size_t in = cfg.pair_width(), a = cfg.aggregator_width();
  switch (cfg.aggregator) {
    case Aggregator::BackwardGru:
      num::declare_cell(store, "agg.gru", num::CellKind::Gru, in, a);
      break;
    case Aggregator::Concat:
      break;
    case Aggregator::Attention:
      num::declare_attention(store, "agg.att", in, a);
      break;
    case Aggregator::BiGru:
      num::declare_bidirectional(store, "agg.bigru", num::CellKind::Gru, in, a / 2);
      break;
  }
}

Var aggregate(Tape& t, Aggregator kind, std::span<const Var> sequence) {
  if (sequence.empty()) throw EmptyInputError("nothing to aggregate");
  switch (kind) {
    case Aggregator::BackwardGru: {
      std::vector<Var> rev(sequence.rbegin(), sequence.rend());
      return num::unidirectional_encode(t, "agg.gru", num::CellKind::Gru, rev).back();
    }
    case Aggregator::Concat:
      return t.concat(sequence);
    case Aggregator::Attention:
      return num::additive_attention_pool(t, "agg.att", sequence).pooled;
    case Aggregator::BiGru: {
      const auto states = num::bidirectional_encode(t, "agg.bigru", num::CellKind::Gru, sequence);
      const std::size_t half = t.value(states.front()).size() / 2;
      return t.concat({t.slice(states.back(), 0, half), t.slice(states.front(), half, half)});
    }
  }
  throw ConfigError("unknown aggregator");
}

Var refinement_features(Tape& t, std::span<const CoAttentionOutput> outputs,
                        const ReadingOrder& order) {
  const Component last = order.last();
  std::vector<const CoAttentionOutput*> mine;
  for (const auto& o : outputs)
    if (o.pair.involves(last)) mine.push_back(&o);
  if (mine.empty()) return Var{};
  std::stable_sort(mine.begin(), mine.end(), [&](auto* a, auto* b) {
    return order.rank(a->pair.partner(last)) < order.rank(b->pair.partner(last));
  });
  std::vector<Var> parts;
  for (const auto* o : mine) parts.push_back(o->pair.first == last ? o->o_d_e : o->o_e_d);
  return parts.size() == 1 ? parts.front() : t.concat(parts);
}

nlohmann::json coattention_diagnostics(const Tape& t, std::span<const CoAttentionOutput> outputs) {
  auto vec = [&](Var v) {
    const auto d = t.value(v).data();
    return std::vector<double>(d.begin(), d.end());
  };
  nlohmann::json pairs = nlohmann::json::array();
  for (const auto& o : outputs) {
    const auto& a = t.value(o.affinity);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t r = 0; r < a.rows(); ++r) {
      std::vector<double> row(a.cols());
      for (std::size_t c = 0; c < a.cols(); ++c) row[c] = a(r, c);
      rows.push_back(row);
    }
    pairs.push_back({{"pair", o.pair.letters()}, {"A", rows}, {"a_D", vec(o.a_d)}, {"a_E", vec(o.a_e)}});
  }
  return pairs;
}

}  // namespace ember::model
