// ember: command-line front end for the detection pipeline.

#include <CLI11.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>

#include "ember/data/news.hpp"
#include "ember/data/split.hpp"
#include "ember/data/synthetic.hpp"
#include "ember/error.hpp"
#include "ember/image/ela.hpp"
#include "ember/image/features.hpp"
#include "ember/model/ablation.hpp"
#include "ember/model/checks.hpp"
#include "ember/model/config_file.hpp"
#include "ember/model/fusion.hpp"
#include "ember/model/train.hpp"
#include "manifest.hpp"

namespace fs = std::filesystem;
using namespace ember;
using nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitIo = 2;
constexpr int kExitUsage = 64;

std::vector<std::string> g_argv;

void fail_line(const std::string& kind, std::string msg) {
  for (auto& c : msg)
    if (c == '\n' || c == '\r') c = ' ';
  std::cerr << "ember: error: " << kind << ": " << msg << "\n";
}

void warn(const std::string& msg) { std::cerr << "ember: warning: " << msg << "\n"; }

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot write file");
  os << text;
  if (!os) throw IoError(path.string(), "failed writing file");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory");
}

// ---- configuration -------------------------------------------------------

struct ConfigFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::string components;
  std::string order;
  std::string dataset;
  std::vector<std::string> sets;
};

void add_config_flags(CLI::App* sub, ConfigFlags& f) {
  sub->add_option("--config", f.config, "key = value configuration file");
  sub->add_option("--seed", f.seed, "training seed (overrides the file)");
  sub->add_option("--lambda", f.lambda, "refinement loss weight");
  sub->add_option("--components", f.components, "active components, e.g. HIC");
  sub->add_option("--order", f.order, "reading order, e.g. HICB");
  sub->add_option("--dataset", f.dataset, "dataset name; selects the lambda preset");
  sub->add_option("--set", f.sets, "extra key=value override (repeatable)");
}

model::TrainConfig resolve_config(const ConfigFlags& f) {
  auto cfg = f.config.empty() ? model::TrainConfig{} : model::load_config_file(f.config);
  for (const auto& kv : f.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    model::set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!f.order.empty() || !f.components.empty()) {
    const std::string base = f.order.empty() ? cfg.model.order.letters() : f.order;
    std::string letters = base;
    if (!f.components.empty()) {
      for (char c : f.components)
        if (base.find(static_cast<char>(std::toupper(static_cast<unsigned char>(c)))) ==
            std::string::npos)
          throw ConfigError(std::string("component '") + c + "' is not in the order " + base);
      letters.clear();
      for (char c : base)
        if (f.components.find(c) != std::string::npos ||
            f.components.find(static_cast<char>(std::tolower(static_cast<unsigned char>(c)))) !=
                std::string::npos)
          letters += c;
    }
    model::set_config_value(cfg, "model.order", letters);
  }
  if (!f.dataset.empty()) {
    cfg.dataset = f.dataset;
    if (!f.lambda) {
      if (auto preset = model::lambda_preset(f.dataset))
        cfg.lambda = *preset;
      else
        warn("no lambda preset for dataset '" + f.dataset + "', keeping " + std::to_string(cfg.lambda));
    }
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.lambda) cfg.lambda = *f.lambda;
  cfg.validate();
  return cfg;
}

// ---- corpus inputs -------------------------------------------------------

struct InputFlags {
  std::string corpus;
  std::string embeddings;
  std::string features;
};

void add_input_flags(CLI::App* sub, InputFlags& f) {
  sub->add_option("--corpus", f.corpus, "JSONL news corpus")->required();
  sub->add_option("--embeddings", f.embeddings, "word vectors, one 'token v1 .. vd' per line")
      ->required();
  sub->add_option("--features", f.features, "image feature table");
}

struct Inputs {
  std::vector<data::NewsItem> items;
  data::EmbeddingTable embeddings;
  std::optional<image::ImageFeatureTable> features;

  model::ModelInputs model_inputs() const {
    return {&embeddings, features ? &*features : nullptr};
  }
};

Inputs load_inputs(const InputFlags& f, const model::ModelConfig& mc, cli::RunManifest& m) {
  Inputs in;
  in.embeddings = data::load_embeddings(f.embeddings, mc.word_dim);
  m.input("embeddings", f.embeddings);
  in.items = data::load_corpus(f.corpus);
  m.input("corpus", f.corpus);
  if (!f.features.empty()) {
    in.features = image::load_image_features(f.features, mc.image_width);
    m.input("features", f.features);
  }
  if (in.items.empty()) throw EmptyInputError("corpus " + f.corpus + " has no items");
  return in;
}

struct Splits {
  std::vector<data::EncodedItem> train, val, test;
};

Splits encode_splits(const Inputs& in, const model::TrainConfig& cfg) {
  auto split = data::split_dataset(in.items, cfg.split);
  for (const auto& w : split.warnings) warn(w);
  return {model::encode_items(split.train, in.embeddings, cfg.caps),
          model::encode_items(split.val, in.embeddings, cfg.caps),
          model::encode_items(split.test, in.embeddings, cfg.caps)};
}

// ---- commands ------------------------------------------------------------

struct SynthFlags {
  data::SyntheticOptions opts;
  std::string out;
};

int cmd_synth(const SynthFlags& f) {
  const fs::path dir = f.out;
  ensure_dir(dir);
  cli::RunManifest m("synth", g_argv);
  m.set_seed(f.opts.seed);
  m.set("synthetic", {{"n", f.opts.n},
                      {"mismatch_rate", f.opts.mismatch_rate},
                      {"topics", f.opts.topics},
                      {"word_dim", f.opts.word_dim},
                      {"image_width", f.opts.image_width},
                      {"words_per_topic", f.opts.words_per_topic},
                      {"filler_words", f.opts.filler_words}});
  const auto corpus = data::generate_synthetic(f.opts);
  data::save_corpus(dir / "corpus.jsonl", corpus.items);
  write_text(dir / "embeddings.txt", data::serialize_embeddings(corpus.words));
  image::save_image_features(dir / "features.txt", corpus.features);
  m.output("corpus", dir / "corpus.jsonl");
  m.output("embeddings", dir / "embeddings.txt");
  m.output("features", dir / "features.txt");
  m.write(dir / "manifest.json");
  std::size_t fake = 0;
  for (const auto& it : corpus.items) fake += it.label == 0;
  std::cout << "wrote " << corpus.items.size() << " items (" << fake << " fake) to " << dir.string()
            << "\n";
  return 0;
}

struct TrainFlags {
  ConfigFlags config;
  InputFlags inputs;
  std::string out;
};

int cmd_train(const TrainFlags& f) {
  auto cfg = resolve_config(f.config);
  const fs::path dir = f.out;
  cli::RunManifest m("train", g_argv);
  if (!f.config.config.empty()) m.input("config", f.config.config);
  const auto in = load_inputs(f.inputs, cfg.model, m);
  if (cfg.model.finetune_embeddings) cfg.model.vocabulary = in.embeddings.rows();
  m.set_config(cfg.to_json());
  m.set_seed(cfg.seed);
  const auto sp = encode_splits(in, cfg);
  ensure_dir(dir);

  model::EmberModel net(cfg.model);
  net.initialize(cfg.seed, in.embeddings);
  std::ofstream log(dir / "train_log.jsonl");
  if (!log) throw IoError((dir / "train_log.jsonl").string(), "cannot write training log");
  const auto result =
      model::train(net, sp.train, sp.val, in.model_inputs(), cfg, [&](const model::EpochRecord& r) {
        log << r.to_json().dump() << "\n" << std::flush;
        char line[128];
        std::snprintf(line, sizeof line, "epoch %zu train_loss %.5f val_loss %.5f val_acc %.4f",
                      r.epoch, r.train_loss, r.val_loss, r.val_acc);
        std::cerr << line << "\n";
        return true;
      });
  log.close();

  model::save_model(dir / "model.ckpt", net, cfg,
                    {{"best_epoch", result.best_epoch},
                     {"best_val_loss", result.best_val_loss},
                     {"epochs_run", result.epochs_run},
                     {"stopped_early", result.stopped_early}});
  m.output("checkpoint", dir / "model.ckpt");
  m.output("train_log", dir / "train_log.jsonl");

  const auto report = model::evaluate(net, sp.test, in.model_inputs(), cfg.lambda, cfg.averaging);
  write_text(dir / "test_report.json", report.to_json().dump(2) + "\n");
  m.output("test_report", dir / "test_report.json");
  m.set("training", {{"best_epoch", result.best_epoch},
                     {"epochs_run", result.epochs_run},
                     {"stopped_early", result.stopped_early}});
  if (result.diverged) m.set("diverged", *result.diverged);
  m.write(dir / "manifest.json");

  if (result.diverged)
    throw NumericError("training diverged (" + *result.diverged + "); best checkpoint kept");
  char line[160];
  std::snprintf(line, sizeof line,
                "best_epoch %zu best_val_loss %.5f test_accuracy %.4f test_f1 %.4f", result.best_epoch,
                result.best_val_loss, report.accuracy, report.f1);
  std::cout << line << "\n";
  return 0;
}

struct EvalFlags {
  std::string model;
  InputFlags inputs;
  std::string split = "test";
  std::string out;
  bool items = false;
  std::size_t diagnostics = 0;
};

int cmd_eval(const EvalFlags& f) {
  auto loaded = model::load_model(f.model);
  const auto& cfg = loaded.config;
  cli::RunManifest m("eval", g_argv);
  m.input("checkpoint", f.model);
  m.set_config(cfg.to_json());
  m.set_seed(cfg.seed);
  const auto in = load_inputs(f.inputs, cfg.model, m);

  std::vector<data::EncodedItem> items;
  if (f.split == "all") {
    items = model::encode_items(in.items, in.embeddings, cfg.caps);
  } else {
    auto sp = encode_splits(in, cfg);
    items = f.split == "train" ? std::move(sp.train)
            : f.split == "val" ? std::move(sp.val)
                               : std::move(sp.test);
  }
  const auto report = model::evaluate(loaded.model, items, in.model_inputs(), cfg.lambda, cfg.averaging);
  const fs::path dir = f.out;
  ensure_dir(dir);
  const auto report_path = dir / ("eval_" + f.split + ".json");
  write_text(report_path, report.to_json(f.items).dump(2) + "\n");
  m.output("report", report_path);

  if (f.diagnostics) {
    json dump = json::array();
    for (std::size_t i = 0; i < std::min(f.diagnostics, items.size()); ++i) {
      num::Tape t(loaded.model.params(), {});
      const auto r = loaded.model.forward(t, items[i], in.model_inputs());
      dump.push_back({{"id", items[i].id},
                      {"label", items[i].label},
                      {"probability", t.scalar(r.g_gru)},
                      {"pairs", model::coattention_diagnostics(t, r.pairs)}});
    }
    write_text(dir / "diagnostics.json", dump.dump(2) + "\n");
    m.output("diagnostics", dir / "diagnostics.json");
  }
  m.write(dir / "manifest.json");

  char line[200];
  std::snprintf(line, sizeof line, "%s n %zu accuracy %.4f precision %.4f recall %.4f f1 %.4f",
                f.split.c_str(), report.count(), report.accuracy, report.precision, report.recall,
                report.f1);
  std::cout << line << "\n";
  return 0;
}

struct AblateFlags {
  ConfigFlags config;
  InputFlags inputs;
  std::string variants;
  std::string out;
};

int cmd_ablate(const AblateFlags& f) {
  auto cfg = resolve_config(f.config);
  cli::RunManifest m("ablate", g_argv);
  if (!f.config.config.empty()) m.input("config", f.config.config);
  std::ifstream vs(f.variants);
  if (!vs) throw IoError(f.variants, "cannot open variants file");
  std::stringstream text;
  text << vs.rdbuf();
  m.input("variants", f.variants);
  const auto in = load_inputs(f.inputs, cfg.model, m);
  if (cfg.model.finetune_embeddings) cfg.model.vocabulary = in.embeddings.rows();
  m.set_config(cfg.to_json());
  m.set_seed(cfg.seed);

  std::vector<std::string> warnings;
  const auto variants = model::parse_variants(text.str(), warnings);
  for (const auto& w : warnings) warn(w);
  warnings.clear();
  const auto sp = encode_splits(in, cfg);
  const model::AblationData data{sp.train, sp.val, sp.test, in.model_inputs(), &in.embeddings};
  const auto rows = model::ablate(cfg, data, variants, warnings, [](const model::AblationRow& r) {
    char line[160];
    std::snprintf(line, sizeof line, "%-24s accuracy %.4f f1 %.4f best_epoch %zu", r.label.c_str(),
                  r.report.accuracy, r.report.f1, r.training.best_epoch);
    std::cerr << line << "\n";
  });
  for (const auto& w : warnings) warn(w);

  const fs::path dir = f.out;
  ensure_dir(dir);
  const auto table = model::ablation_table(rows);
  write_text(dir / "ablation.tsv", table);
  json detail = json::array();
  for (const auto& r : rows)
    detail.push_back({{"variant", r.tag},
                      {"label", r.label},
                      {"pairs", r.pairs},
                      {"report", r.report.to_json()},
                      {"best_epoch", r.training.best_epoch},
                      {"epochs_run", r.training.epochs_run}});
  write_text(dir / "ablation.json", detail.dump(2) + "\n");
  m.output("table", dir / "ablation.tsv");
  m.output("detail", dir / "ablation.json");
  if (!warnings.empty()) m.set("warnings", warnings);
  m.write(dir / "manifest.json");
  std::cout << table;
  return 0;
}

struct GradcheckFlags {
  ConfigFlags config;
  std::size_t samples = 200;
  std::string corrupt;
  std::string out;
};

int cmd_gradcheck(const GradcheckFlags& f) {
  const auto cfg = resolve_config(f.config);
  model::GradcheckRequest req;
  req.samples = f.samples;
  req.seed = cfg.seed;
  req.corrupt_path = f.corrupt;
  const auto results = model::check_module_gradients(cfg, req);

  bool ok = true;
  std::string worst;
  double worst_err = -1;
  json report = json::array();
  for (const auto& r : results) {
    char line[160];
    std::snprintf(line, sizeof line, "%-28s samples %4zu max_rel_error %.3e  %s", r.module.c_str(),
                  r.report.checks.size(), r.report.max_rel_error, r.report.passed ? "ok" : "FAIL");
    std::cout << line << "\n";
    ok = ok && r.report.passed;
    if (r.report.max_rel_error > worst_err) worst_err = r.report.max_rel_error, worst = r.report.worst_path;
    report.push_back({{"module", r.module},
                      {"samples", r.report.checks.size()},
                      {"max_rel_error", r.report.max_rel_error},
                      {"worst_path", r.report.worst_path},
                      {"passed", r.report.passed}});
  }
  if (ok)
    std::cout << "PASS\n";
  else
    std::cout << "FAIL " << worst << "\n";

  if (!f.out.empty()) {
    const fs::path dir = f.out;
    ensure_dir(dir);
    cli::RunManifest m("gradcheck", g_argv);
    m.set_config(cfg.to_json());
    m.set_seed(cfg.seed);
    write_text(dir / "gradcheck.json", report.dump(2) + "\n");
    m.output("report", dir / "gradcheck.json");
    m.write(dir / "manifest.json");
  }
  return ok ? 0 : kExitFailure;
}

struct ElaFlags {
  std::string in;
  std::string out;
  double r = image::kDefaultErrorLevel;
  double gain = 1.0;
};

int cmd_ela(const ElaFlags& f) {
  const auto bytes = image::read_file(f.in);
  const auto map = image::ela(bytes, f.r);
  const auto heat = image::ela_heatmap(map, f.gain);
  image::write_file(f.out, image::encode_png_gray(map.width, map.height, heat));
  cli::RunManifest m("ela", g_argv);
  m.set("error_level", f.r);
  m.set("quality", image::ela_quality(f.r));
  m.set("mean_magnitude", map.mean());
  m.input("image", f.in);
  m.output("heatmap", f.out);
  m.write(f.out + ".manifest.json");
  char line[96];
  std::snprintf(line, sizeof line, "mean_ela %.6f quality %d size %zux%zu", map.mean(),
                image::ela_quality(f.r), map.width, map.height);
  std::cout << line << "\n";
  return 0;
}

struct ExportFlags {
  std::string model;
  InputFlags inputs;
  std::string out;
};

int cmd_export(const ExportFlags& f) {
  const auto loaded = model::load_model(f.model);
  const auto& cfg = loaded.config;
  cli::RunManifest m("export-embeddings", g_argv);
  m.input("checkpoint", f.model);
  m.set_config(cfg.to_json());
  const auto in = load_inputs(f.inputs, cfg.model, m);
  const auto items = model::encode_items(in.items, in.embeddings, cfg.caps);

  std::vector<std::vector<double>> rows(items.size());
  model::parallel_for(items.size(), model::thread_count(), [&](std::size_t i, std::size_t) {
    rows[i] = model::news_embedding(loaded.model, items[i], in.model_inputs());
  });
  std::string text;
  char buf[32];
  for (std::size_t i = 0; i < items.size(); ++i) {
    text += items[i].id + "\t" + std::to_string(items[i].label);
    for (double v : rows[i]) {
      const auto res = std::to_chars(buf, buf + sizeof buf, static_cast<float>(v));
      text += '\t';
      text.append(buf, res.ptr);
    }
    text += '\n';
  }
  write_text(f.out, text);
  m.output("vectors", f.out);
  m.write(f.out + ".manifest.json");
  std::cout << "wrote " << items.size() << " vectors of width " << cfg.model.fea_gru_width() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  g_argv.assign(argv, argv + argc);
  CLI::App app{"ember: multi-component fake news detection"};
  app.require_subcommand(1);

  SynthFlags synth;
  auto* s = app.add_subcommand("synth", "generate a synthetic corpus with word vectors and image features");
  s->add_option("--out", synth.out, "output directory")->required();
  s->add_option("--n", synth.opts.n, "number of items");
  s->add_option("--seed", synth.opts.seed, "generator seed");
  s->add_option("--topics", synth.opts.topics, "latent topics");
  s->add_option("--mismatch", synth.opts.mismatch_rate, "fraction of fake items");
  s->add_option("--word-dim", synth.opts.word_dim, "word vector width");
  s->add_option("--image-width", synth.opts.image_width, "image feature width");

  TrainFlags train;
  auto* t = app.add_subcommand("train", "train a model and evaluate it on the test split");
  add_config_flags(t, train.config);
  add_input_flags(t, train.inputs);
  t->add_option("--out", train.out, "output directory")->required();

  EvalFlags eval;
  auto* e = app.add_subcommand("eval", "evaluate a checkpoint");
  e->add_option("--model", eval.model, "checkpoint file")->required();
  add_input_flags(e, eval.inputs);
  e->add_option("--split", eval.split, "test, val, train or all")
      ->check(CLI::IsMember({"test", "val", "train", "all"}));
  e->add_option("--out", eval.out, "output directory")->required();
  e->add_flag("--items", eval.items, "include per-item probabilities");
  e->add_option("--diagnostics", eval.diagnostics, "dump co-attention maps for the first N items");

  AblateFlags ablate;
  auto* a = app.add_subcommand("ablate", "train every variant in a variants file");
  add_config_flags(a, ablate.config);
  add_input_flags(a, ablate.inputs);
  a->add_option("--variants", ablate.variants, "one variant per line")->required();
  a->add_option("--out", ablate.out, "output directory")->required();

  GradcheckFlags grad;
  auto* g = app.add_subcommand("gradcheck", "finite-difference check of every module");
  add_config_flags(g, grad.config);
  g->add_option("--samples", grad.samples, "coordinates per module")->check(CLI::Validator(
      [](std::string& v) { return v == "0" ? std::string("must be at least 1") : std::string(); },
      "N>=1"));
  g->add_option("--out", grad.out, "write a JSON report and manifest here");
  g->add_option("--corrupt", grad.corrupt)->group("");

  ElaFlags ela;
  auto* l = app.add_subcommand("ela", "error level analysis heatmap");
  l->add_option("in", ela.in, "input image")->required();
  l->add_option("out", ela.out, "output PNG")->required();
  l->add_option("--r", ela.r, "error level")->check(CLI::Range(0.0, 1.0));
  l->add_option("--gain", ela.gain, "heatmap gain");

  ExportFlags exp;
  auto* x = app.add_subcommand("export-embeddings", "write the news vector of every item");
  x->add_option("--model", exp.model, "checkpoint file")->required();
  add_input_flags(x, exp.inputs);
  x->add_option("--out", exp.out, "output TSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& h) {
    return app.exit(h);
  } catch (const CLI::CallForAllHelp& h) {
    return app.exit(h);
  } catch (const CLI::ParseError& err) {
    fail_line("usage", err.what());
    return kExitUsage;
  }

  try {
    if (*s) return cmd_synth(synth);
    if (*t) return cmd_train(train);
    if (*e) return cmd_eval(eval);
    if (*a) return cmd_ablate(ablate);
    if (*g) return cmd_gradcheck(grad);
    if (*l) return cmd_ela(ela);
    if (*x) return cmd_export(exp);
  } catch (const IoError& err) {
    fail_line(err.kind(), err.what());
    return kExitIo;
  } catch (const Error& err) {
    fail_line(err.kind(), err.what());
    return kExitFailure;
  } catch (const std::exception& err) {
    fail_line("internal", err.what());
    return kExitFailure;
  }
  return kExitFailure;
}
