#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ember/components.hpp"
#include "json.hpp"

namespace ember::model {

// How the sequence of pair features is reduced to one news vector.
enum class Aggregator {
  BackwardGru,  // GRU over the pair sequence from last to first
  Concat,       // plain concatenation (no sequence model)
  Attention,    // additive attention pooling over the pairs
  BiGru,        // bidirectional GRU, final states of both directions
};

std::string aggregator_name(Aggregator a);
Aggregator aggregator_from_name(const std::string& name);

struct ModelConfig {
  std::size_t hidden = 50;        // h: per-direction recurrent width
  std::size_t coattention = 0;    // k: co-attention hidden width, 0 means 2h
  std::size_t word_dim = 100;
  std::size_t image_width = 1024;
  ReadingOrder order;             // active components, in reading order
  // Explicit pair sequence; empty means pair_order(order).
  std::vector<ComponentPair> pair_sequence;
  std::vector<ComponentPair> dropped_pairs;
  Aggregator aggregator = Aggregator::BackwardGru;
  bool use_ela = true;
  bool finetune_embeddings = false;
  std::size_t vocabulary = 0;     // rows of the embedding table (fine-tuning only)

  std::size_t width() const { return 2 * hidden; }
  std::size_t k() const { return coattention ? coattention : 2 * hidden; }
  std::size_t pair_width() const { return 4 * hidden; }
  std::size_t aggregator_width() const { return 4 * hidden; }

  // Pairs fed to the aggregator, in sequence order, after drops.
  std::vector<ComponentPair> active_pairs() const;
  // Pairs that contain the last-read component, ordered by the partner's
  // reading rank.
  std::vector<ComponentPair> refinement_pairs() const;
  std::size_t fea_gru_width() const;

  // Throws ConfigError when the configuration cannot form a network.
  void validate() const;

  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
};

std::string pairs_to_string(const std::vector<ComponentPair>& pairs);
std::vector<ComponentPair> parse_pairs(const std::string& text, const ReadingOrder& order);

}  // namespace ember::model
