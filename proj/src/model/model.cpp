#include "ember/model/model.hpp"

#include <unordered_map>

#include "ember/error.hpp"
#include "ember/numerics/layers.hpp"

namespace ember::model {

using num::Tape;
using num::Tensor;
using num::Var;

EmberModel::EmberModel(ModelConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  declare_extractors(store_, cfg_);
  declare_fusion(store_, cfg_);
  const std::size_t g = cfg_.fea_gru_width();
  num::declare_mlp(store_, "mlp_gru", g, std::max<std::size_t>(1, g / 2));
  const std::size_t r = cfg_.refinement_pairs().size() * cfg_.width();
  if (r) num::declare_mlp(store_, "mlp_r", r, std::max<std::size_t>(1, r / 2));
}

void EmberModel::initialize(std::uint64_t seed, const data::EmbeddingTable& embeddings) {
  store_.init_glorot(seed);
  if (store_.contains("embed.nocomp")) {
    if (embeddings.dim() != cfg_.word_dim)
      throw ConfigError("embedding width " + std::to_string(embeddings.dim()) +
                        " does not match model.word_dim " + std::to_string(cfg_.word_dim));
    const auto unk = embeddings.row(data::kUnk);
    std::copy(unk.begin(), unk.end(), store_.value("embed.nocomp").begin());
  }
  if (store_.contains("embed.table")) {
    if (embeddings.rows() != cfg_.vocabulary)
      throw ConfigError("embedding table has " + std::to_string(embeddings.rows()) +
                        " rows, model expects " + std::to_string(cfg_.vocabulary));
    auto dst = store_.value("embed.table");
    for (std::size_t i = 0; i < embeddings.rows(); ++i) {
      const auto row = embeddings.row(static_cast<int>(i));
      std::copy(row.begin(), row.end(), dst.begin() + static_cast<std::ptrdiff_t>(i * cfg_.word_dim));
    }
  }
}

namespace {

void check_finite(const Tape& t, Var v, const std::string& stage) {
  if (!t.value(v).all_finite()) throw NumericError("non-finite value in " + stage);
}

void check_finite(const Tape& t, const EncodedComponent& c) {
  for (Var v : c.vectors) check_finite(t, v, extractor_prefix(c.kind) + " output");
}

class WordLookup {
 public:
  WordLookup(Tape& t, const data::EmbeddingTable& table) : t_(t), table_(table) {
    if (t.store().contains("embed.table")) table_id_ = t.store().id("embed.table");
  }

  Var operator()(int index) {
    if (auto it = cache_.find(index); it != cache_.end()) return it->second;
    Var v;
    if (index == data::kNoComp) {
      v = t_.param("embed.nocomp");
    } else if (table_id_) {
      v = t_.param_row(*table_id_, static_cast<std::size_t>(index));
    } else {
      const auto row = table_.row(index);
      v = t_.constant(Tensor({row.size()}, std::vector<double>(row.begin(), row.end())));
    }
    cache_.emplace(index, v);
    return v;
  }

  WordSequence sentence(const data::IndexSentence& s) {
    if (s.empty()) return {(*this)(data::kNoComp)};
    WordSequence out;
    out.reserve(s.size());
    for (int i : s) out.push_back((*this)(i));
    return out;
  }

  std::vector<WordSequence> sentences(const std::vector<data::IndexSentence>& ss) {
    std::vector<WordSequence> out;
    for (const auto& s : ss) out.push_back(sentence(s));
    if (out.empty()) out.push_back({(*this)(data::kNoComp)});
    return out;
  }

 private:
  Tape& t_;
  const data::EmbeddingTable& table_;
  std::optional<num::ParamStore::Id> table_id_;
  std::unordered_map<int, Var> cache_;
};

}  // namespace

ForwardResult EmberModel::forward(Tape& t, const data::EncodedItem& item,
                                  const ModelInputs& inputs) const {
  if (!inputs.embeddings) throw ConfigError("forward needs an embedding table");
  if (inputs.embeddings->dim() != cfg_.word_dim)
    throw ConfigError("embedding width " + std::to_string(inputs.embeddings->dim()) +
                      " does not match model.word_dim " + std::to_string(cfg_.word_dim));
  WordLookup words(t, *inputs.embeddings);
  ForwardResult r;

  for (Component c : cfg_.order.components()) {
    EncodedComponent enc;
    switch (c) {
      case Component::Headline: enc = hfe(t, words.sentence(item.headline)); break;
      case Component::Body: {
        const auto ss = words.sentences(item.body);
        enc = bfe(t, ss);
        break;
      }
      case Component::Comment: {
        const auto ss = words.sentences(item.comments);
        enc = cfe(t, ss);
        break;
      }
      case Component::Image: {
        std::vector<ImageInput> images;
        if (inputs.features) {
          if (inputs.features->width() != cfg_.image_width)
            throw ConfigError("image feature width " + std::to_string(inputs.features->width()) +
                              " does not match model.image_width " +
                              std::to_string(cfg_.image_width));
          const Tensor zeros({cfg_.image_width}, 0.0);
          auto half = [&](bool present, const std::vector<double>& v) {
            return t.constant(present ? Tensor({v.size()}, v) : zeros);
          };
          for (const auto& ref : item.image_refs) {
            const auto* f = inputs.features->find(ref);
            if (!f || (!f->has_original && !f->has_ela)) continue;
            images.push_back({half(f->has_original, f->original), half(f->has_ela, f->ela)});
          }
        }
        enc = ife(t, images, cfg_.use_ela);
        break;
      }
    }
    check_finite(t, enc);
    r.components.push_back(std::move(enc));
  }

  auto component = [&](Component c) -> const EncodedComponent& {
    return r.components[cfg_.order.rank(c)];
  };
  std::vector<Var> sequence;
  for (const auto& p : cfg_.active_pairs()) {
    r.pairs.push_back(co_attention(t, coattention_prefix(p), component(p.first), component(p.second)));
    check_finite(t, r.pairs.back().o_de, "co-attention " + p.letters());
    sequence.push_back(r.pairs.back().o_de);
  }

  r.fea_gru = aggregate(t, cfg_.aggregator, sequence);
  check_finite(t, r.fea_gru, "aggregator");
  r.g_gru = num::mlp_probability(t, "mlp_gru", r.fea_gru);
  check_finite(t, r.g_gru, "mlp_gru");
  r.fea_r = refinement_features(t, r.pairs, cfg_.order);
  if (r.fea_r.valid()) {
    r.g_r = num::mlp_probability(t, "mlp_r", r.fea_r);
    check_finite(t, r.g_r, "mlp_r");
  }
  return r;
}

Var joint_loss(Tape& t, const ForwardResult& r, int label, double lambda) {
  if (lambda < 0) throw ConfigError("lambda must be non-negative");
  const Var l_gru = t.bce(r.g_gru, label, num::kProbabilityClip);
  if (!r.g_r.valid() || lambda == 0) return l_gru;
  return t.add_scaled(l_gru, t.bce(r.g_r, label, num::kProbabilityClip), lambda);
}

double joint_loss(double g_gru, std::optional<double> g_r, int label, double lambda) {
  if (lambda < 0) throw ConfigError("lambda must be non-negative");
  double l = num::cross_entropy(g_gru, label);
  if (g_r && lambda != 0) l += lambda * num::cross_entropy(*g_r, label);
  return l;
}

}  // namespace ember::model
