#include "ember/model/config.hpp"

#include <algorithm>
#include <sstream>

#include "ember/error.hpp"

namespace ember::model {

std::string aggregator_name(Aggregator a) {
  switch (a) {
    case Aggregator::BackwardGru: return "gru";
    case Aggregator::Concat: return "concat";
    case Aggregator::Attention: return "attention";
    case Aggregator::BiGru: return "bigru";
  }
  return "?";
}

Aggregator aggregator_from_name(const std::string& name) {
  if (name == "gru") return Aggregator::BackwardGru;
  if (name == "concat") return Aggregator::Concat;
  if (name == "attention") return Aggregator::Attention;
  if (name == "bigru") return Aggregator::BiGru;
  throw ConfigError("unknown aggregator '" + name + "' (gru, concat, attention, bigru)");
}

std::string pairs_to_string(const std::vector<ComponentPair>& pairs) {
  std::string s;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (i) s += ',';
    s += pairs[i].letters();
  }
  return s;
}

std::vector<ComponentPair> parse_pairs(const std::string& text, const ReadingOrder& order) {
  std::vector<ComponentPair> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    part.erase(std::remove_if(part.begin(), part.end(),
                              [](char c) { return c == ' ' || c == '(' || c == ')'; }),
               part.end());
    if (part.empty()) continue;
    out.push_back(parse_pair(part, order));
  }
  return out;
}

std::vector<ComponentPair> ModelConfig::active_pairs() const {
  auto seq = pair_sequence.empty() ? pair_order(order) : pair_sequence;
  std::vector<ComponentPair> out;
  for (const auto& p : seq)
    if (std::find(dropped_pairs.begin(), dropped_pairs.end(), p) == dropped_pairs.end())
      out.push_back(p);
  return out;
}

std::vector<ComponentPair> ModelConfig::refinement_pairs() const {
  const Component last = order.last();
  std::vector<ComponentPair> out;
  for (const auto& p : active_pairs())
    if (p.involves(last)) out.push_back(p);
  std::sort(out.begin(), out.end(), [&](const ComponentPair& a, const ComponentPair& b) {
    return order.rank(a.partner(last)) < order.rank(b.partner(last));
  });
  return out;
}

std::size_t ModelConfig::fea_gru_width() const {
  if (aggregator == Aggregator::Concat) return active_pairs().size() * pair_width();
  return aggregator_width();
}

void ModelConfig::validate() const {
  if (hidden == 0) throw ConfigError("model.h must be positive");
  if (word_dim == 0) throw ConfigError("model.word_dim must be positive");
  if (image_width == 0 && order.contains(Component::Image))
    throw ConfigError("model.image_width must be positive when images are active");
  if (order.size() < 2) throw ConfigError("at least two components are required");
  const std::size_t n = order.size();
  if (!pair_sequence.empty()) {
    if (pair_sequence.size() != n * (n - 1) / 2)
      throw ConfigError("pair sequence must list all " + std::to_string(n * (n - 1) / 2) +
                        " pairs of the active components");
    for (const auto& p : pair_order(order))
      if (std::find(pair_sequence.begin(), pair_sequence.end(), p) == pair_sequence.end())
        throw ConfigError("pair sequence lacks pair " + p.letters());
  }
  for (const auto& p : dropped_pairs)
    if (!order.contains(p.first) || !order.contains(p.second))
      throw ConfigError("dropped pair " + p.letters() + " is not among the active components");
  if (active_pairs().empty()) throw ConfigError("no component pair remains");
  if (finetune_embeddings && vocabulary == 0)
    throw ConfigError("fine-tuned embeddings need the vocabulary size");
}

nlohmann::json ModelConfig::to_json() const {
  return {
      {"h", hidden},
      {"k", k()},
      {"word_dim", word_dim},
      {"image_width", image_width},
      {"order", order.letters()},
      {"pair_sequence", pairs_to_string(pair_sequence)},
      {"dropped_pairs", pairs_to_string(dropped_pairs)},
      {"aggregator", aggregator_name(aggregator)},
      {"use_ela", use_ela},
      {"finetune_embeddings", finetune_embeddings},
      {"vocabulary", vocabulary},
  };
}

ModelConfig ModelConfig::from_json(const nlohmann::json& j) {
  try {
    ModelConfig c;
    c.hidden = j.at("h").get<std::size_t>();
    c.coattention = j.at("k").get<std::size_t>();
    c.word_dim = j.at("word_dim").get<std::size_t>();
    c.image_width = j.at("image_width").get<std::size_t>();
    c.order = ReadingOrder::parse(j.at("order").get<std::string>());
    c.pair_sequence = parse_pairs(j.at("pair_sequence").get<std::string>(), c.order);
    c.dropped_pairs = parse_pairs(j.at("dropped_pairs").get<std::string>(), c.order);
    c.aggregator = aggregator_from_name(j.at("aggregator").get<std::string>());
    c.use_ela = j.at("use_ela").get<bool>();
    c.finetune_embeddings = j.at("finetune_embeddings").get<bool>();
    c.vocabulary = j.at("vocabulary").get<std::size_t>();
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("model configuration: ") + e.what());
  }
}

}  // namespace ember::model
