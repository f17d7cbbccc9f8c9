#include "ember/model/ablation.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <sstream>

#include "ember/error.hpp"

namespace ember::model {

namespace {

std::string lower(std::string_view s) {
  std::string out;
  for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::string strip_args(std::string_view s) {
  std::string out;
  for (char c : s)
    if (!std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' && c != '[' && c != ']')
      out += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  return out;
}

}  // namespace

std::string AblationVariant::label() const {
  switch (kind) {
    case Kind::DropComponent: return "Ember/" + argument;
    case Kind::DropEla: return "Ember/ELA";
    case Kind::DropGru: return "Ember/GRU";
    case Kind::AggAttention: return "Ember-Att";
    case Kind::AggBiGru: return "Ember-BiGRU";
    case Kind::DropPair: return "Ember/" + argument;
    case Kind::Reorder: return "[" + argument + "]";
  }
  return tag;
}

AblationVariant parse_variant(std::string_view text) {
  std::string s(text);
  s.erase(0, s.find_first_not_of(" \t\r"));
  s.erase(s.find_last_not_of(" \t\r") + 1);
  std::string name = s, arg;
  if (auto pos = s.find_first_of(":("); pos != std::string::npos) {
    name = s.substr(0, pos);
    arg = strip_args(s.substr(pos + 1));
  }
  name = lower(name);
  while (!name.empty() && std::isspace(static_cast<unsigned char>(name.back()))) name.pop_back();

  AblationVariant v;
  using K = AblationVariant::Kind;
  auto no_arg = [&](K k) {
    if (!arg.empty()) throw ConfigError("variant '" + name + "' takes no argument");
    v.kind = k;
    v.tag = name;
  };
  if (name == "drop_component") {
    if (arg.size() != 1 || !component_from_letter(arg[0]))
      throw ConfigError("drop_component needs one of H, I, C, B");
    v.kind = K::DropComponent;
    v.argument = arg;
  } else if (name == "drop_ela") {
    no_arg(K::DropEla);
  } else if (name == "drop_gru") {
    no_arg(K::DropGru);
  } else if (name == "agg_attention") {
    no_arg(K::AggAttention);
  } else if (name == "agg_bigru") {
    no_arg(K::AggBiGru);
  } else if (name == "drop_pair") {
    arg.erase(std::remove(arg.begin(), arg.end(), ','), arg.end());
    if (arg.size() != 2) throw ConfigError("drop_pair needs two component letters");
    v.kind = K::DropPair;
    v.argument = arg;
  } else if (name == "reorder") {
    if (arg.empty()) throw ConfigError("reorder needs a pair sequence");
    std::string seq;
    std::stringstream ss(arg);
    std::string part;
    while (std::getline(ss, part, ',')) {
      if (part.empty()) continue;
      if (part.size() != 2) throw ConfigError("reorder: '" + part + "' is not a pair");
      if (!seq.empty()) seq += ',';
      seq += part;
    }
    v.kind = K::Reorder;
    v.argument = seq;
  } else {
    throw ConfigError("unknown ablation variant '" + std::string(text) + "'");
  }
  if (v.tag.empty()) v.tag = name + ":" + v.argument;
  return v;
}

std::vector<AblationVariant> parse_variants(std::string_view text,
                                            std::vector<std::string>& warnings) {
  std::vector<AblationVariant> out;
  std::stringstream ss{std::string(text)};
  std::string line;
  std::size_t no = 0;
  while (std::getline(ss, line)) {
    ++no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(parse_variant(line));
    } catch (const ConfigError& e) {
      warnings.push_back("variants line " + std::to_string(no) + ": " + e.what() + "; skipped");
    }
  }
  return out;
}

TrainConfig apply_variant(const TrainConfig& base, const AblationVariant& v) {
  TrainConfig cfg = base;
  ModelConfig& m = cfg.model;
  using K = AblationVariant::Kind;
  switch (v.kind) {
    case K::DropComponent: {
      const Component c = *component_from_letter(v.argument[0]);
      if (!m.order.contains(c))
        throw ConfigError(v.tag + ": component " + v.argument + " is not active");
      if (m.order.size() <= 2) throw ConfigError(v.tag + ": would leave fewer than two components");
      auto keep = [&](const ComponentPair& p) { return !p.involves(c); };
      std::vector<ComponentPair> seq, dropped;
      std::copy_if(m.pair_sequence.begin(), m.pair_sequence.end(), std::back_inserter(seq), keep);
      std::copy_if(m.dropped_pairs.begin(), m.dropped_pairs.end(), std::back_inserter(dropped), keep);
      m.order = m.order.without(c);
      m.pair_sequence = seq;
      m.dropped_pairs = dropped;
      break;
    }
    case K::DropEla:
      if (!m.order.contains(Component::Image)) throw ConfigError(v.tag + ": images are not active");
      if (!m.use_ela) throw ConfigError(v.tag + ": ELA is already off");
      m.use_ela = false;
      break;
    case K::DropGru: m.aggregator = Aggregator::Concat; break;
    case K::AggAttention: m.aggregator = Aggregator::Attention; break;
    case K::AggBiGru: m.aggregator = Aggregator::BiGru; break;
    case K::DropPair: {
      ComponentPair p;
      try {
        p = parse_pair(v.argument, m.order);
      } catch (const ConfigError& e) {
        throw ConfigError(v.tag + ": " + e.what());
      }
      const auto active = m.active_pairs();
      if (std::find(active.begin(), active.end(), p) == active.end())
        throw ConfigError(v.tag + ": pair is not active");
      m.dropped_pairs.push_back(p);
      break;
    }
    case K::Reorder:
      try {
        m.pair_sequence = parse_pairs(v.argument, m.order);
      } catch (const ConfigError& e) {
        throw ConfigError(v.tag + ": " + e.what());
      }
      break;
  }
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(v.tag + ": " + e.what());
  }
  return cfg;
}

AblationRow run_configuration(const TrainConfig& cfg, const AblationData& data) {
  if (!data.embeddings) throw ConfigError("ablation needs the embedding table");
  EmberModel model(cfg.model);
  model.initialize(cfg.seed, *data.embeddings);
  AblationRow row;
  row.training = train(model, data.train, data.val, data.inputs, cfg);
  if (row.training.diverged) throw NumericError("training diverged: " + *row.training.diverged);
  row.report = evaluate(model, data.test, data.inputs, cfg.lambda, cfg.averaging);
  row.pairs = pairs_to_string(cfg.model.active_pairs());
  return row;
}

std::vector<AblationRow> ablate(const TrainConfig& base, const AblationData& data,
                                std::span<const AblationVariant> variants,
                                std::vector<std::string>& warnings,
                                const AblationProgress& progress) {
  struct Planned {
    TrainConfig cfg;
    std::string tag, label;
    bool full = false;
  };
  std::vector<Planned> plan;
  // Configurations compare by their serialized form.
  const auto canonical_key = [&](TrainConfig c) {
    if (c.model.pair_sequence == pair_order(c.model.order)) c.model.pair_sequence.clear();
    return c.to_json().dump();
  };
  const auto full_key = canonical_key(base);
  bool full_placed = false;
  for (const auto& v : variants) {
    try {
      auto cfg = apply_variant(base, v);
      const bool full = canonical_key(cfg) == full_key;
      if (full && full_placed) {
        warnings.push_back(v.tag + ": duplicates the full model; skipped");
        continue;
      }
      full_placed = full_placed || full;
      plan.push_back({std::move(cfg), full ? "ember" : v.tag, full ? "Ember" : v.label(), full});
    } catch (const ConfigError& e) {
      warnings.push_back(std::string(e.what()) + "; skipped");
    }
  }
  if (!full_placed) plan.push_back({base, "ember", "Ember", true});

  std::vector<AblationRow> rows;
  for (const auto& p : plan) {
    auto row = run_configuration(p.cfg, data);
    row.tag = p.tag;
    row.label = p.label;
    if (progress) progress(row);
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string ablation_table(std::span<const AblationRow> rows) {
  std::string out = "variant\tlabel\tpairs\taccuracy\tprecision\trecall\tf1\tbest_epoch\n";
  char buf[160];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f\t%.6f\t%.6f\t%zu\n", r.report.accuracy,
                  r.report.precision, r.report.recall, r.report.f1, r.training.best_epoch);
    out += r.tag + "\t" + r.label + "\t" + r.pairs + buf;
  }
  return out;
}

}  // namespace ember::model
