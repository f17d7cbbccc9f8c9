#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ember/data/embeddings.hpp"
#include "ember/data/split.hpp"
#include "ember/model/model.hpp"
#include "json.hpp"

namespace ember::model {

enum class Averaging { Weighted, Macro };
std::string averaging_name(Averaging a);
Averaging averaging_from_name(const std::string& name);

struct TrainConfig {
  ModelConfig model;
  double lambda = 0.6;
  double lr = 1e-3;
  std::size_t batch_size = 64;
  std::size_t max_epochs = 100;
  std::size_t patience = 8;
  bool early_stopping = true;
  std::uint64_t seed = 1;
  data::SplitSpec split;
  data::EncodingCaps caps;
  std::string dataset;  // informational; selects the lambda preset when loaded by name
  Averaging averaging = Averaging::Weighted;

  void validate() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json(const nlohmann::json& j);
};

// Lambda used for a named dataset: PolitiFact2 0.6, PolitiFact7 1.0,
// GossipCop 0.1, Compre 0.4 (names compared case-insensitively).
std::optional<double> lambda_preset(std::string_view dataset);

// Stops once `patience` epochs have passed without a strictly lower
// validation loss than the best so far. Epochs are numbered from 1.
class EarlyStopping {
 public:
  explicit EarlyStopping(std::size_t patience);
  // Records one epoch; returns true when training should stop now.
  bool update(std::size_t epoch, double val_loss);
  bool improved() const noexcept { return improved_; }
  std::size_t best_epoch() const noexcept { return best_epoch_; }
  double best_loss() const noexcept { return best_loss_; }

 private:
  std::size_t patience_;
  std::size_t best_epoch_ = 0;
  double best_loss_ = 0;
  bool improved_ = false;
};

struct EvalReport {
  double accuracy = 0;
  double precision = 0;
  double recall = 0;
  double f1 = 0;
  // Confusion counts with "real" (label 1) as the positive class.
  std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
  double loss = 0;  // mean joint loss
  Averaging averaging = Averaging::Weighted;
  std::vector<std::string> ids;
  std::vector<int> labels;
  std::vector<double> probabilities;  // G_gru per item

  std::size_t count() const noexcept { return tp + tn + fp + fn; }
  nlohmann::json to_json(bool with_items = false) const;
};

// An item is predicted real iff p >= 0.5. Precision, recall and F1 are
// computed per class and combined by support (or a plain mean for Macro).
EvalReport compute_metrics(std::span<const int> labels, std::span<const double> probabilities,
                           Averaging averaging = Averaging::Weighted);

struct EpochRecord {
  std::size_t epoch = 0;
  double train_loss = 0;
  double val_loss = 0;
  double val_acc = 0;
  nlohmann::json to_json() const;
};

struct TrainResult {
  std::vector<EpochRecord> log;
  std::size_t best_epoch = 0;
  double best_val_loss = 0;
  std::size_t epochs_run = 0;
  bool stopped_early = false;
  // Set when a non-finite loss or gradient ended training; the model then
  // holds the parameters of the best epoch seen before that.
  std::optional<std::string> diverged;
};

// Called after every epoch; returning false ends training after that epoch.
using EpochCallback = std::function<bool(const EpochRecord&)>;

// Mini-batch Adam on the joint loss. Batches are drawn from a seeded shuffle
// each epoch; per-item gradients are summed in item order, so results do not
// depend on the thread count. On return the model holds the parameters of
// the epoch with the lowest validation loss.
TrainResult train(EmberModel& model, std::span<const data::EncodedItem> train_items,
                  std::span<const data::EncodedItem> val_items, const ModelInputs& inputs,
                  const TrainConfig& cfg, const EpochCallback& on_epoch = {});

// Mean joint loss over a fixed set of items (no parameter update).
double mean_loss(const EmberModel& model, std::span<const data::EncodedItem> items,
                 const ModelInputs& inputs, double lambda);

// Throws EmptyInputError on an empty split.
EvalReport evaluate(const EmberModel& model, std::span<const data::EncodedItem> items,
                    const ModelInputs& inputs, double lambda,
                    Averaging averaging = Averaging::Weighted);

// Fea_gru of one item.
std::vector<double> news_embedding(const EmberModel& model, const data::EncodedItem& item,
                                   const ModelInputs& inputs);

// Worker count from EMBER_THREADS, else the hardware concurrency.
std::size_t thread_count();
// Calls fn(i, worker) for i in [0, n) on up to `threads` workers.
void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& fn);

std::vector<data::EncodedItem> encode_items(std::span<const data::NewsItem> items,
                                            const data::EmbeddingTable& table,
                                            const data::EncodingCaps& caps);

// Checkpoint header carries the full training configuration.
void save_model(const std::filesystem::path& path, const EmberModel& model,
                const TrainConfig& cfg, const nlohmann::json& extra = {});
struct LoadedModel {
  EmberModel model;
  TrainConfig config;
  nlohmann::json header;
};
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace ember::model
