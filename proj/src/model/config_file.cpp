#include "ember/model/config_file.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "ember/error.hpp"

namespace ember::model {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (it->is_object())
      flatten(*it, key, out);
    else
      out.emplace_back(key, *it);
  }
}

json* lookup(json& root, const std::string& key) {
  json* node = &root;
  std::size_t start = 0;
  while (true) {
    const auto dot = key.find('.', start);
    const std::string part = key.substr(start, dot == std::string::npos ? dot : dot - start);
    if (!node->is_object() || !node->contains(part)) return nullptr;
    node = &(*node)[part];
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  return node->is_object() ? nullptr : node;
}

template <typename T>
T parse_number(const std::string& key, const std::string& v) {
  T out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size())
    throw ConfigError("bad value '" + v + "' for " + key);
  return out;
}

json parse_like(const json& like, const std::string& key, const std::string& v) {
  if (like.is_boolean()) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError("bad value '" + v + "' for " + key + " (expected true or false)");
  }
  if (like.is_number_unsigned() || like.is_number_integer()) {
    if (!v.empty() && v[0] == '-') throw ConfigError("bad value '" + v + "' for " + key);
    return parse_number<std::uint64_t>(key, v);
  }
  if (like.is_number_float()) return parse_number<double>(key, v);
  if (like.is_array()) {
    json arr = json::array();
    std::string part;
    std::stringstream ss(v);
    while (std::getline(ss, part, ',')) arr.push_back(parse_like(like.at(0), key, trim(part)));
    if (arr.size() != like.size())
      throw ConfigError(key + " needs " + std::to_string(like.size()) + " comma-separated values");
    return arr;
  }
  return v;
}

std::string render(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_array()) {
    std::string s;
    for (const auto& x : v) s += (s.empty() ? "" : ",") + render(x);
    return s;
  }
  return v.dump();
}

}  // namespace

void set_config_value(TrainConfig& cfg, const std::string& key, const std::string& value) {
  json j = cfg.to_json();
  j["model"]["k"] = cfg.model.coattention;  // keep "0 means 2h" when only h changes
  json* slot = lookup(j, key);
  if (!slot) throw ConfigError("unknown configuration key '" + key + "'");
  *slot = parse_like(*slot, key, trim(value));
  try {
    cfg = TrainConfig::from_json(j);
  } catch (const FormatError& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

TrainConfig parse_config_text(std::string_view text) {
  json j = TrainConfig{}.to_json();
  j["model"]["k"] = 0;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    const std::string body = trim(line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const auto where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    const std::string key = trim(body.substr(0, eq));
    json* slot = lookup(j, key);
    if (!slot) throw ConfigError(where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError(where + "repeated key '" + key + "'");
    try {
      *slot = parse_like(*slot, key, trim(body.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
  if (!seen.count("lambda"))
    if (auto preset = lambda_preset(j.at("dataset").get<std::string>())) j["lambda"] = *preset;
  try {
    return TrainConfig::from_json(j);
  } catch (const FormatError& e) {
    throw ConfigError(e.what());
  }
}

TrainConfig load_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw IoError(path.string(), "cannot open configuration");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::string config_to_text(const TrainConfig& cfg) {
  std::vector<std::pair<std::string, json>> flat;
  flatten(cfg.to_json(), "", flat);
  std::string out;
  for (const auto& [k, v] : flat) out += k + " = " + render(v) + "\n";
  return out;
}

}  // namespace ember::model
