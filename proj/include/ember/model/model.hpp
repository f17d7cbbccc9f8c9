#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "ember/data/embeddings.hpp"
#include "ember/image/features.hpp"
#include "ember/model/config.hpp"
#include "ember/model/extractors.hpp"
#include "ember/model/fusion.hpp"
#include "ember/numerics/params.hpp"
#include "ember/numerics/tape.hpp"

namespace ember::model {

// Read-only lookup tables shared by every forward pass.
struct ModelInputs {
  const data::EmbeddingTable* embeddings = nullptr;
  const image::ImageFeatureTable* features = nullptr;  // may be null without images
};

struct ForwardResult {
  num::Var g_gru;    // probability that the item is real
  num::Var g_r;      // refinement head; invalid when no refinement pair is active
  num::Var fea_gru;
  num::Var fea_r;
  std::vector<EncodedComponent> components;  // reading order
  std::vector<CoAttentionOutput> pairs;      // aggregation order
};

class EmberModel {
 public:
  explicit EmberModel(ModelConfig cfg);

  const ModelConfig& config() const noexcept { return cfg_; }
  num::ParamStore& params() noexcept { return store_; }
  const num::ParamStore& params() const noexcept { return store_; }

  // Glorot weights from `seed`; the learned NOCOMP word vector starts as UNK
  // and the fine-tuned table (if any) as a copy of the pretrained one.
  void initialize(std::uint64_t seed, const data::EmbeddingTable& embeddings);

  // Throws NumericError naming the stage if a non-finite value appears.
  ForwardResult forward(num::Tape& t, const data::EncodedItem& item,
                        const ModelInputs& inputs) const;

 private:
  ModelConfig cfg_;
  num::ParamStore store_;
};

// L = L_gru + lambda * L_R (the second term is dropped when G_R is absent).
num::Var joint_loss(num::Tape& t, const ForwardResult& r, int label, double lambda);
double joint_loss(double g_gru, std::optional<double> g_r, int label, double lambda);

}  // namespace ember::model
