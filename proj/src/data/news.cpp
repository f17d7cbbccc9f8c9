#include "ember/data/news.hpp"

#include <cctype>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "ember/error.hpp"
#include "json.hpp"

namespace ember::data {

using nlohmann::json;

Sentence tokenize(std::string_view text) {
  Sentence out;
  std::string cur;
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    // Bytes >= 0x80 belong to UTF-8 sequences and stay inside tokens.
    if (u >= 0x80 || std::isalnum(u) || ch == '\'' || ch == '_') {
      cur += static_cast<char>(std::tolower(u));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

std::vector<Sentence> split_sentences(std::string_view text) {
  std::vector<Sentence> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char ch = text[i];
    const bool terminal = ch == '.' || ch == '!' || ch == '?';
    const bool boundary =
        terminal && (i + 1 == text.size() || std::isspace(static_cast<unsigned char>(text[i + 1])));
    if (!boundary) continue;
    auto s = tokenize(text.substr(start, i + 1 - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = i + 1;
  }
  auto rest = tokenize(text.substr(start));
  if (!rest.empty()) out.push_back(std::move(rest));
  return out;
}

namespace {

[[noreturn]] void bad(std::size_t line, const std::string& msg) {
  throw FormatError("corpus line " + std::to_string(line) + ": " + msg);
}

Sentence read_sentence(const json& j, std::size_t line, const char* field) {
  if (j.is_string()) return tokenize(j.get<std::string>());
  if (!j.is_array()) bad(line, std::string(field) + " must be a string or token list");
  Sentence s;
  for (const auto& t : j) {
    if (!t.is_string()) bad(line, std::string(field) + " tokens must be strings");
    s.push_back(t.get<std::string>());
  }
  return s;
}

std::vector<Sentence> read_sentences(const json& j, std::size_t line, const char* field,
                                     bool split_strings) {
  std::vector<Sentence> out;
  if (j.is_null()) return out;
  if (j.is_string()) {
    if (split_strings) return split_sentences(j.get<std::string>());
    auto s = tokenize(j.get<std::string>());
    if (!s.empty()) out.push_back(std::move(s));
    return out;
  }
  if (!j.is_array()) bad(line, std::string(field) + " must be a string or a list");
  for (const auto& e : j) {
    auto s = read_sentence(e, line, field);
    if (!s.empty()) out.push_back(std::move(s));
  }
  return out;
}

NewsItem parse_record(const std::string& text, std::size_t line) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(line, e.what());
  }
  if (!j.is_object()) bad(line, "record must be a JSON object");
  NewsItem item;
  if (!j.contains("id") || !j["id"].is_string()) bad(line, "missing string field 'id'");
  item.id = j["id"].get<std::string>();
  if (!j.contains("label") || !j["label"].is_number_integer()) bad(line, "missing integer field 'label'");
  item.label = j["label"].get<int>();
  if (item.label != 0 && item.label != 1)
    throw LabelError("corpus line " + std::to_string(line) + ": label must be 0 or 1");
  static const std::set<std::string> known{"id", "label", "headline", "body", "comments", "image_refs"};
  for (const auto& [k, v] : j.items())
    if (!known.count(k)) bad(line, "unknown field '" + k + "'");

  if (j.contains("headline") && !j["headline"].is_null()) {
    const auto& h = j["headline"];
    std::vector<Sentence> sentences;
    if (h.is_string()) {
      sentences = split_sentences(h.get<std::string>());
    } else if (h.is_array() && !h.empty() && h[0].is_array()) {
      sentences = read_sentences(h, line, "headline", false);
    } else {
      auto s = read_sentence(h, line, "headline");
      if (!s.empty()) sentences.push_back(std::move(s));
    }
    if (sentences.size() > 1)
      std::cerr << "warning: corpus line " << line << ": headline of item " << item.id
                << " has " << sentences.size() << " sentences; keeping the first\n";
    if (!sentences.empty()) item.headline = std::move(sentences.front());
  }
  if (j.contains("body")) item.body = read_sentences(j["body"], line, "body", true);
  if (j.contains("comments")) item.comments = read_sentences(j["comments"], line, "comments", false);
  if (j.contains("image_refs") && !j["image_refs"].is_null()) {
    if (!j["image_refs"].is_array()) bad(line, "image_refs must be a list");
    for (const auto& r : j["image_refs"]) {
      if (!r.is_string()) bad(line, "image_refs entries must be strings");
      item.image_refs.push_back(r.get<std::string>());
    }
  }
  return item;
}

}  // namespace

std::vector<NewsItem> parse_corpus(std::string_view text) {
  std::vector<NewsItem> items;
  std::set<std::string> ids;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto item = parse_record(line, lineno);
    if (!ids.insert(item.id).second) bad(lineno, "duplicate id '" + item.id + "'");
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<NewsItem> load_corpus(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open corpus");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_corpus(ss.str());
}

std::string serialize_corpus(const std::vector<NewsItem>& items) {
  std::string out;
  for (const auto& it : items) {
    json j;
    j["id"] = it.id;
    j["label"] = it.label;
    j["headline"] = it.headline;
    j["body"] = it.body;
    j["comments"] = it.comments;
    j["image_refs"] = it.image_refs;
    out += j.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const std::filesystem::path& path, const std::vector<NewsItem>& items) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot write corpus");
  os << serialize_corpus(items);
}

}  // namespace ember::data
