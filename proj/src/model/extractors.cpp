#include "ember/model/extractors.hpp"

#include "ember/error.hpp"
#include "ember/numerics/layers.hpp"

namespace ember::model {

using num::CellKind;
using num::Tape;
using num::Var;

std::string extractor_prefix(Component c) {
  switch (c) {
    case Component::Headline: return "hfe";
    case Component::Image: return "ife";
    case Component::Comment: return "cfe";
    case Component::Body: return "bfe";
  }
  return "?";
}

void declare_extractors(num::ParamStore& store, const ModelConfig& cfg) {
  const std::size_t h = cfg.hidden, w = cfg.width(), d = cfg.word_dim;
  bool text = false;
  for (Component c : cfg.order.components()) {
    const std::string p = extractor_prefix(c);
    switch (c) {
      case Component::Headline:
      case Component::Body: {
        const auto kind = c == Component::Headline ? CellKind::Lstm : CellKind::Gru;
        num::declare_bidirectional(store, p + ".word", kind, d, h);
        num::declare_attention(store, p + ".att", w, w);
        num::declare_bidirectional(store, p + ".sent", kind, w, h);
        text = true;
        break;
      }
      case Component::Comment:
        num::declare_attention(store, p + ".att", d, w);
        num::declare_bidirectional(store, p + ".sent", CellKind::Gru, d, h);
        text = true;
        break;
      case Component::Image:
        store.declare(p + ".orig.W", {w, cfg.image_width});
        store.declare(p + ".orig.b", {w});
        if (cfg.use_ela) {
          store.declare(p + ".ela.W", {w, cfg.image_width});
          store.declare(p + ".ela.b", {w});
        }
        num::declare_attention(store, p + ".att", w, w);
        num::declare_bidirectional(store, p + ".seq", CellKind::Gru, w, h);
        store.declare(p + ".nocomp", {w});
        break;
    }
  }
  if (text) store.declare("embed.nocomp", {d});
  if (text && cfg.finetune_embeddings) store.declare("embed.table", {cfg.vocabulary, d});
}

namespace {

EncodedComponent sentence_stack(Tape& t, Component c, CellKind kind,
                                std::span<const WordSequence> sentences) {
  const std::string p = extractor_prefix(c);
  if (sentences.empty()) throw EmptyInputError(component_name(c) + " has no sentences");
  EncodedComponent out;
  out.kind = c;
  std::vector<Var> pooled;
  for (const auto& words : sentences) {
    const auto states = num::bidirectional_encode(t, p + ".word", kind, words);
    const auto att = num::additive_attention_pool(t, p + ".att", states);
    out.attention.push_back(att.weights);
    pooled.push_back(att.pooled);
  }
  out.vectors = num::bidirectional_encode(t, p + ".sent", kind, pooled);
  out.mask.assign(out.vectors.size(), 1);
  return out;
}

}  // namespace

EncodedComponent hfe(Tape& t, const WordSequence& headline) {
  return sentence_stack(t, Component::Headline, CellKind::Lstm,
                        std::span<const WordSequence>(&headline, 1));
}

EncodedComponent bfe(Tape& t, std::span<const WordSequence> sentences) {
  return sentence_stack(t, Component::Body, CellKind::Gru, sentences);
}

EncodedComponent cfe(Tape& t, std::span<const WordSequence> comments) {
  if (comments.empty()) throw EmptyInputError("comments are empty");
  EncodedComponent out;
  out.kind = Component::Comment;
  std::vector<Var> pooled;
  for (const auto& words : comments) {
    if (words.empty()) throw EmptyInputError("empty comment");
    const auto att = num::additive_attention_pool(t, "cfe.att", words);
    out.attention.push_back(att.weights);
    pooled.push_back(att.pooled);
  }
  out.vectors = num::bidirectional_encode(t, "cfe.sent", CellKind::Gru, pooled);
  out.mask.assign(out.vectors.size(), 1);
  return out;
}

EncodedComponent ife(Tape& t, std::span<const ImageInput> images, bool use_ela) {
  EncodedComponent out;
  out.kind = Component::Image;
  std::vector<Var> pooled;
  if (images.empty()) {
    pooled.push_back(t.param("ife.nocomp"));
  } else {
    const Var wo = t.param("ife.orig.W"), bo = t.param("ife.orig.b");
    for (const auto& img : images) {
      std::vector<Var> halves{t.add(t.matmul(wo, img.original), bo)};
      if (use_ela)
        halves.push_back(t.add(t.matmul(t.param("ife.ela.W"), img.ela), t.param("ife.ela.b")));
      const auto att = num::additive_attention_pool(t, "ife.att", halves);
      out.attention.push_back(att.weights);
      pooled.push_back(att.pooled);
    }
  }
  out.vectors = num::bidirectional_encode(t, "ife.seq", CellKind::Gru, pooled);
  out.mask.assign(out.vectors.size(), 1);
  return out;
}

}  // namespace ember::model
