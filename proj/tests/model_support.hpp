#pragma once

// Small synthetic setups shared by the model suites.

#include <memory>

#include "ember/data/split.hpp"
#include "ember/data/synthetic.hpp"
#include "ember/model/train.hpp"

namespace ember::testing {

struct Toy {
  data::SyntheticCorpus corpus;
  data::EmbeddingTable embeddings;
  std::vector<data::EncodedItem> items;
  std::vector<data::EncodedItem> train, val, test;

  model::ModelInputs inputs() const { return {&embeddings, &corpus.features}; }
};

inline data::SyntheticOptions tiny_options(std::size_t n, std::uint64_t seed = 1) {
  data::SyntheticOptions o;
  o.n = n;
  o.seed = seed;
  o.word_dim = 8;
  o.image_width = 16;
  o.words_per_topic = 10;
  o.filler_words = 10;
  return o;
}

inline std::unique_ptr<Toy> make_toy(const data::SyntheticOptions& o, std::uint64_t split_seed = 1) {
  auto t = std::make_unique<Toy>();
  t->corpus = data::generate_synthetic(o);
  t->embeddings = t->corpus.embedding_table();
  t->items = model::encode_items(t->corpus.items, t->embeddings, {});
  const auto idx = data::split_indices(t->items.size(), {{8, 1, 1}, split_seed});
  for (auto i : idx.train) t->train.push_back(t->items[i]);
  for (auto i : idx.val) t->val.push_back(t->items[i]);
  for (auto i : idx.test) t->test.push_back(t->items[i]);
  return t;
}

inline model::TrainConfig tiny_config(const data::SyntheticOptions& o, std::size_t h = 3) {
  model::TrainConfig c;
  c.model.hidden = h;
  c.model.coattention = h;
  c.model.word_dim = o.word_dim;
  c.model.image_width = o.image_width;
  return c;
}

}  // namespace ember::testing
