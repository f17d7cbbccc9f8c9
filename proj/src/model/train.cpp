#include "ember/model/train.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <numeric>
#include <thread>

#include "ember/error.hpp"
#include "ember/numerics/adam.hpp"
#include "ember/numerics/checkpoint.hpp"
#include "ember/numerics/rng.hpp"

namespace ember::model {

using nlohmann::json;

std::string averaging_name(Averaging a) { return a == Averaging::Macro ? "macro" : "weighted"; }

Averaging averaging_from_name(const std::string& name) {
  if (name == "weighted") return Averaging::Weighted;
  if (name == "macro") return Averaging::Macro;
  throw ConfigError("unknown averaging '" + name + "' (weighted, macro)");
}

// ---- configuration -----------------------------------------------------------

void TrainConfig::validate() const {
  model.validate();
  if (!(lambda >= 0) || !std::isfinite(lambda)) throw ConfigError("train.lambda must be >= 0");
  if (!(lr >= 0) || !std::isfinite(lr)) throw ConfigError("train.lr must be >= 0");
  if (batch_size == 0) throw ConfigError("train.batch_size must be positive");
  if (max_epochs == 0) throw ConfigError("train.max_epochs must be positive");
  if (patience == 0) throw ConfigError("train.patience must be at least 1");
}

json TrainConfig::to_json() const {
  return {
      {"model", model.to_json()},
      {"lambda", lambda},
      {"lr", lr},
      {"batch_size", batch_size},
      {"max_epochs", max_epochs},
      {"patience", patience},
      {"early_stopping", early_stopping},
      {"seed", seed},
      {"split", {{"ratios", split.ratios}, {"seed", split.seed}}},
      {"caps",
       {{"tokens_per_sentence", caps.tokens_per_sentence},
        {"body_sentences", caps.body_sentences},
        {"comments", caps.comments},
        {"images", caps.images}}},
      {"dataset", dataset},
      {"averaging", averaging_name(averaging)},
  };
}

TrainConfig TrainConfig::from_json(const json& j) {
  try {
    TrainConfig c;
    c.model = ModelConfig::from_json(j.at("model"));
    c.lambda = j.at("lambda").get<double>();
    c.lr = j.at("lr").get<double>();
    c.batch_size = j.at("batch_size").get<std::size_t>();
    c.max_epochs = j.at("max_epochs").get<std::size_t>();
    c.patience = j.at("patience").get<std::size_t>();
    c.early_stopping = j.at("early_stopping").get<bool>();
    c.seed = j.at("seed").get<std::uint64_t>();
    c.split.ratios = j.at("split").at("ratios").get<std::array<std::size_t, 3>>();
    c.split.seed = j.at("split").at("seed").get<std::uint64_t>();
    const auto& caps = j.at("caps");
    c.caps.tokens_per_sentence = caps.at("tokens_per_sentence").get<std::size_t>();
    c.caps.body_sentences = caps.at("body_sentences").get<std::size_t>();
    c.caps.comments = caps.at("comments").get<std::size_t>();
    c.caps.images = caps.at("images").get<std::size_t>();
    c.dataset = j.at("dataset").get<std::string>();
    c.averaging = averaging_from_name(j.at("averaging").get<std::string>());
    c.validate();
    return c;
  } catch (const json::exception& e) {
    throw FormatError(std::string("training configuration: ") + e.what());
  }
}

std::optional<double> lambda_preset(std::string_view dataset) {
  std::string key;
  for (char c : dataset) key += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (key == "politifact2") return 0.6;
  if (key == "politifact7") return 1.0;
  if (key == "gossipcop") return 0.1;
  if (key == "compre") return 0.4;
  return std::nullopt;
}

// ---- early stopping ------------------------------------------------------------

EarlyStopping::EarlyStopping(std::size_t patience) : patience_(patience) {
  if (patience == 0) throw ConfigError("patience must be at least 1");
}

bool EarlyStopping::update(std::size_t epoch, double val_loss) {
  improved_ = best_epoch_ == 0 || val_loss < best_loss_;
  if (improved_) {
    best_epoch_ = epoch;
    best_loss_ = val_loss;
    return false;
  }
  return epoch - best_epoch_ >= patience_;
}

// ---- metrics -------------------------------------------------------------------

json EvalReport::to_json(bool with_items) const {
  json j = {
      {"accuracy", accuracy},
      {"precision", precision},
      {"recall", recall},
      {"f1", f1},
      {"averaging", averaging_name(averaging)},
      {"loss", loss},
      {"count", count()},
      {"confusion", {{"tp", tp}, {"tn", tn}, {"fp", fp}, {"fn", fn}}},
  };
  if (with_items) {
    json items = json::array();
    for (std::size_t i = 0; i < probabilities.size(); ++i)
      items.push_back({{"id", i < ids.size() ? ids[i] : ""},
                       {"label", labels[i]},
                       {"probability", probabilities[i]}});
    j["items"] = items;
  }
  return j;
}

EvalReport compute_metrics(std::span<const int> labels, std::span<const double> probabilities,
                           Averaging averaging) {
  if (labels.empty()) throw EmptyInputError("cannot evaluate an empty split");
  if (labels.size() != probabilities.size())
    throw DimensionError("labels and probabilities differ in length");
  EvalReport r;
  r.averaging = averaging;
  r.labels.assign(labels.begin(), labels.end());
  r.probabilities.assign(probabilities.begin(), probabilities.end());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw LabelError("label must be 0 or 1");
    const bool pred_real = probabilities[i] >= 0.5;
    if (labels[i] == 1) (pred_real ? r.tp : r.fn)++;
    else (pred_real ? r.fp : r.tn)++;
  }
  const double n = static_cast<double>(labels.size());
  r.accuracy = static_cast<double>(r.tp + r.tn) / n;

  struct ClassStats { double tp, predicted, support; };
  const ClassStats classes[2] = {
      {static_cast<double>(r.tn), static_cast<double>(r.tn + r.fn), static_cast<double>(r.tn + r.fp)},
      {static_cast<double>(r.tp), static_cast<double>(r.tp + r.fp), static_cast<double>(r.tp + r.fn)},
  };
  double weight_sum = 0;
  for (const auto& c : classes) {
    if (averaging == Averaging::Macro && c.support == 0 && c.predicted == 0) continue;
    const double p = c.predicted > 0 ? c.tp / c.predicted : 0.0;
    const double rec = c.support > 0 ? c.tp / c.support : 0.0;
    const double f = p + rec > 0 ? 2 * p * rec / (p + rec) : 0.0;
    const double w = averaging == Averaging::Weighted ? c.support : 1.0;
    r.precision += w * p;
    r.recall += w * rec;
    r.f1 += w * f;
    weight_sum += w;
  }
  r.precision /= weight_sum;
  r.recall /= weight_sum;
  r.f1 /= weight_sum;
  return r;
}

json EpochRecord::to_json() const {
  return {{"epoch", epoch}, {"train_loss", train_loss}, {"val_loss", val_loss}, {"val_acc", val_acc}};
}

// ---- threading -----------------------------------------------------------------

std::size_t thread_count() {
  if (const char* env = std::getenv("EMBER_THREADS"); env && *env) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (*end != '\0' || v < 1) throw ConfigError("EMBER_THREADS must be a positive integer");
    return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, std::size_t threads,
                  const std::function<void(std::size_t, std::size_t)>& fn) {
  const std::size_t workers = std::min(std::max<std::size_t>(threads, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i, 0);
    return;
  }
  std::vector<std::exception_ptr> errors(n);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) {
        try {
          fn(i, w);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

// ---- evaluation ----------------------------------------------------------------

namespace {

struct ItemOutput {
  double g_gru = 0;
  std::optional<double> g_r;
};

ItemOutput run_item(const EmberModel& model, const data::EncodedItem& item,
                    const ModelInputs& inputs) {
  num::Tape t(model.params(), {});
  const auto r = model.forward(t, item, inputs);
  ItemOutput out{t.scalar(r.g_gru), {}};
  if (r.g_r.valid()) out.g_r = t.scalar(r.g_r);
  return out;
}

std::vector<ItemOutput> run_items(const EmberModel& model, std::span<const data::EncodedItem> items,
                                  const ModelInputs& inputs) {
  std::vector<ItemOutput> out(items.size());
  parallel_for(items.size(), thread_count(),
               [&](std::size_t i, std::size_t) { out[i] = run_item(model, items[i], inputs); });
  return out;
}

}  // namespace

double mean_loss(const EmberModel& model, std::span<const data::EncodedItem> items,
                 const ModelInputs& inputs, double lambda) {
  if (items.empty()) throw EmptyInputError("cannot compute a loss over no items");
  const auto outs = run_items(model, items, inputs);
  double sum = 0;
  for (std::size_t i = 0; i < items.size(); ++i)
    sum += joint_loss(outs[i].g_gru, outs[i].g_r, items[i].label, lambda);
  return sum / static_cast<double>(items.size());
}

EvalReport evaluate(const EmberModel& model, std::span<const data::EncodedItem> items,
                    const ModelInputs& inputs, double lambda, Averaging averaging) {
  if (items.empty()) throw EmptyInputError("cannot evaluate an empty split");
  const auto outs = run_items(model, items, inputs);
  std::vector<int> labels;
  std::vector<double> probs;
  double loss = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    labels.push_back(items[i].label);
    probs.push_back(outs[i].g_gru);
    loss += joint_loss(outs[i].g_gru, outs[i].g_r, items[i].label, lambda);
  }
  auto report = compute_metrics(labels, probs, averaging);
  report.loss = loss / static_cast<double>(items.size());
  for (const auto& it : items) report.ids.push_back(it.id);
  return report;
}

std::vector<double> news_embedding(const EmberModel& model, const data::EncodedItem& item,
                                   const ModelInputs& inputs) {
  num::Tape t(model.params(), {});
  const auto r = model.forward(t, item, inputs);
  const auto d = t.value(r.fea_gru).data();
  return {d.begin(), d.end()};
}

std::vector<data::EncodedItem> encode_items(std::span<const data::NewsItem> items,
                                            const data::EmbeddingTable& table,
                                            const data::EncodingCaps& caps) {
  std::vector<data::EncodedItem> out;
  out.reserve(items.size());
  for (const auto& it : items) out.push_back(data::encode_item(it, table, caps));
  return out;
}

// ---- training ------------------------------------------------------------------

TrainResult train(EmberModel& model, std::span<const data::EncodedItem> train_items,
                  std::span<const data::EncodedItem> val_items, const ModelInputs& inputs,
                  const TrainConfig& cfg, const EpochCallback& on_epoch) {
  cfg.validate();
  if (train_items.empty()) throw EmptyInputError("training split is empty");
  if (val_items.empty()) throw EmptyInputError("validation split is empty");

  auto& store = model.params();
  num::Adam adam(store, {.lr = cfg.lr});
  num::Rng rng(cfg.seed ^ 0x5851f42d4c957f2dULL);
  const std::size_t threads = thread_count();
  std::vector<std::vector<double>> sinks(threads, std::vector<double>(store.total_size()));
  std::vector<double> losses(threads);

  std::vector<std::size_t> order(train_items.size());
  std::iota(order.begin(), order.end(), 0);

  EarlyStopping stopper(cfg.patience);
  std::vector<double> best = store.values();
  TrainResult result;

  auto diverge = [&](const std::string& why) {
    result.diverged = why;
    store.values() = best;
  };

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    rng.shuffle(order);
    double loss_sum = 0;
    bool failed = false;
    for (std::size_t start = 0; start < order.size() && !failed; start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double scale = 1.0 / static_cast<double>(stop - start);
      store.zero_grads();
      for (std::size_t chunk = start; chunk < stop; chunk += threads) {
        const std::size_t len = std::min(threads, stop - chunk);
        try {
          parallel_for(len, threads, [&](std::size_t j, std::size_t) {
            auto& sink = sinks[j];
            std::fill(sink.begin(), sink.end(), 0.0);
            const auto& item = train_items[order[chunk + j]];
            num::Tape t(store, sink);
            const auto r = model.forward(t, item, inputs);
            const auto loss = joint_loss(t, r, item.label, cfg.lambda);
            losses[j] = t.scalar(loss);
            t.backward(loss, scale);
          });
        } catch (const NumericError& e) {
          diverge(std::string("epoch ") + std::to_string(epoch) + ": " + e.what());
          failed = true;
          break;
        }
        for (std::size_t j = 0; j < len; ++j) {
          loss_sum += losses[j];
          auto& g = store.grads();
          for (std::size_t k = 0; k < g.size(); ++k) g[k] += sinks[j][k];
        }
      }
      if (failed) break;
      try {
        adam.step(store);
      } catch (const NumericError& e) {
        diverge(std::string("epoch ") + std::to_string(epoch) + ": " + e.what());
        failed = true;
      }
    }
    if (failed) break;

    EpochRecord rec;
    rec.epoch = epoch;
    rec.train_loss = loss_sum / static_cast<double>(order.size());
    try {
      const auto report = evaluate(model, val_items, inputs, cfg.lambda, cfg.averaging);
      rec.val_loss = report.loss;
      rec.val_acc = report.accuracy;
    } catch (const NumericError& e) {
      diverge(std::string("epoch ") + std::to_string(epoch) + " validation: " + e.what());
      break;
    }
    if (!std::isfinite(rec.val_loss) || !std::isfinite(rec.train_loss)) {
      diverge("epoch " + std::to_string(epoch) + ": loss is not finite");
      break;
    }
    const bool stop = stopper.update(epoch, rec.val_loss);
    if (stopper.improved()) best = store.values();
    result.log.push_back(rec);
    result.epochs_run = epoch;
    if (on_epoch && !on_epoch(rec)) break;
    if (cfg.early_stopping && stop) {
      result.stopped_early = true;
      break;
    }
  }
  result.best_epoch = stopper.best_epoch();
  result.best_val_loss = stopper.best_loss();
  store.values() = best;
  return result;
}

// ---- persistence ---------------------------------------------------------------

void save_model(const std::filesystem::path& path, const EmberModel& model,
                const TrainConfig& cfg, const json& extra) {
  json header = {{"format", "ember-model"}, {"config", cfg.to_json()}};
  if (extra.is_object())
    for (const auto& [k, v] : extra.items()) header[k] = v;
  num::save_checkpoint(path, header, model.params());
}

LoadedModel load_model(const std::filesystem::path& path) {
  auto ck = num::load_checkpoint(path);
  if (ck.header.value("format", "") != "ember-model")
    throw FormatError(path.string() + ": not a model checkpoint");
  auto cfg = TrainConfig::from_json(ck.header.at("config"));
  EmberModel model(cfg.model);
  num::assign_params(model.params(), ck.params);
  return {std::move(model), std::move(cfg), std::move(ck.header)};
}

}  // namespace ember::model
