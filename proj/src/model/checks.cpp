#include "ember/model/checks.hpp"

#include "ember/data/synthetic.hpp"
#include "ember/error.hpp"
#include "ember/numerics/rng.hpp"

namespace ember::model {

namespace {

struct Group {
  const char* module;
  const char* prefix;
};

constexpr Group kGroups[] = {
    {"intra_extractors/embedding", "embed."},
    {"intra_extractors/hfe", "hfe."},
    {"intra_extractors/ife", "ife."},
    {"intra_extractors/cfe", "cfe."},
    {"intra_extractors/bfe", "bfe."},
    {"inter_fusion/coattention", "coatt."},
    {"inter_fusion/aggregation", "agg."},
    {"model_training/mlp_gru", "mlp_gru."},
    {"model_training/mlp_r", "mlp_r."},
};

}  // namespace

std::vector<ModuleGradcheck> check_module_gradients(const TrainConfig& cfg,
                                                    const GradcheckRequest& req) {
  if (req.samples == 0) throw ConfigError("gradcheck needs at least one sample");

  data::SyntheticOptions so;
  so.n = 20;
  so.seed = req.seed + 1;
  so.word_dim = cfg.model.word_dim;
  so.image_width = cfg.model.image_width;
  so.words_per_topic = 8;
  so.filler_words = 8;
  const auto corpus = data::generate_synthetic(so);
  const auto table = corpus.embedding_table();

  // Short sequences keep each forward pass cheap; coverage does not depend
  // on length.
  data::EncodingCaps caps{5, 3, 3, 2};
  std::vector<data::NewsItem> raw{corpus.items[0], corpus.items[1]};
  raw[1].comments.clear();
  const auto items = encode_items(raw, table, caps);

  ModelConfig mc = cfg.model;
  if (mc.finetune_embeddings) mc.vocabulary = table.rows();
  EmberModel model(mc);
  model.initialize(cfg.seed, table);
  if (!req.corrupt_path.empty() && !model.params().contains(req.corrupt_path))
    throw ConfigError("no parameter named '" + req.corrupt_path + "'");
  num::Rng rng(req.seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto& v : model.params().values()) v += rng.uniform(-0.2, 0.2);

  const ModelInputs inputs{&table, &corpus.features};
  const double lambda = cfg.lambda;
  const num::LossFn loss = [&](num::ParamStore& st, std::span<double> sink) {
    double total = 0;
    for (const auto& item : items) {
      num::Tape t(st, sink);
      const auto r = model.forward(t, item, inputs);
      const auto l = joint_loss(t, r, item.label, lambda);
      if (!sink.empty()) t.backward(l, 1.0 / items.size());
      total += t.scalar(l) / items.size();
    }
    return total;
  };

  std::vector<ModuleGradcheck> out;
  for (const auto& g : kGroups) {
    bool present = false;
    for (const auto& info : model.params().infos())
      present = present || info.path.starts_with(g.prefix);
    if (!present) continue;
    num::GradcheckOptions opts;
    opts.samples = req.samples;
    opts.seed = req.seed;
    opts.tolerance = req.tolerance;
    opts.prefixes = {g.prefix};
    if (req.corrupt_path.starts_with(g.prefix)) {
      // sample the corrupted tensor only, so the fault cannot be missed
      opts.corrupt_path = req.corrupt_path;
      opts.prefixes = {req.corrupt_path};
    }
    out.push_back({g.module, g.prefix, num::gradcheck(model.params(), loss, opts)});
  }
  return out;
}

}  // namespace ember::model
