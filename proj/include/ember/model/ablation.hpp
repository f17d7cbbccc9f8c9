#pragma once

#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ember/model/train.hpp"

namespace ember::model {

// One line of a variants file:
//
//   drop_component:H   drop_ela   drop_gru   agg_attention   agg_bigru
//   drop_pair:HI       reorder:HB,IB,CB,HI,HC,IC
//
// "tag(arg)" is accepted as well as "tag:arg"; blank lines and '#' comments
// are ignored.
struct AblationVariant {
  enum class Kind { DropComponent, DropEla, DropGru, AggAttention, AggBiGru, DropPair, Reorder };
  Kind kind = Kind::DropEla;
  std::string argument;  // component letter, pair letters or comma-separated pairs
  std::string tag;       // normalised spelling, e.g. "drop_pair:HI"

  // Row label in the style of the ablation tables ("Ember/H", "Ember-Att", ...).
  std::string label() const;
};

AblationVariant parse_variant(std::string_view text);  // throws ConfigError

// Invalid lines are skipped; each one adds a message to `warnings`.
std::vector<AblationVariant> parse_variants(std::string_view text,
                                            std::vector<std::string>& warnings);

// Throws ConfigError when the variant does not fit the configuration.
TrainConfig apply_variant(const TrainConfig& base, const AblationVariant& v);

struct AblationData {
  std::span<const data::EncodedItem> train;
  std::span<const data::EncodedItem> val;
  std::span<const data::EncodedItem> test;
  ModelInputs inputs;
  const data::EmbeddingTable* embeddings = nullptr;  // for model initialisation
};

struct AblationRow {
  std::string tag;    // "ember" for the full model
  std::string label;
  std::string pairs;  // aggregation sequence actually used
  EvalReport report;  // on the test split
  TrainResult training;
};

using AblationProgress = std::function<void(const AblationRow&)>;

// Trains and evaluates every valid variant and the full model under the same
// seed. Rows follow the variants in file order with the full model last; a
// variant that reproduces the full configuration (e.g. the default reorder)
// takes the full model's row in place.
std::vector<AblationRow> ablate(const TrainConfig& base, const AblationData& data,
                                std::span<const AblationVariant> variants,
                                std::vector<std::string>& warnings,
                                const AblationProgress& progress = {});

// Trains and evaluates a single configuration.
AblationRow run_configuration(const TrainConfig& cfg, const AblationData& data);

std::string ablation_table(std::span<const AblationRow> rows);

}  // namespace ember::model
