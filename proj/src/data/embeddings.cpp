#include "ember/data/embeddings.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ember/error.hpp"

namespace ember::data {

EmbeddingTable::EmbeddingTable(std::size_t dim)
    : dim_(dim), matrix_(kReservedRows * dim, 0.0) {}

EmbeddingTable EmbeddingTable::from_words(
    std::size_t dim, const std::vector<std::pair<std::string, std::vector<double>>>& words) {
  EmbeddingTable t(dim);
  std::vector<double> mean(dim, 0.0);
  for (const auto& [tok, vec] : words) {
    if (vec.size() != dim) throw FormatError("embedding for '" + tok + "' has wrong width");
    if (!t.vocab_.emplace(tok, static_cast<int>(t.rows())).second)
      throw FormatError("duplicate embedding token '" + tok + "'");
    t.matrix_.insert(t.matrix_.end(), vec.begin(), vec.end());
    for (std::size_t i = 0; i < dim; ++i) mean[i] += vec[i];
  }
  if (!words.empty())
    for (auto& m : mean) m /= static_cast<double>(words.size());
  std::copy(mean.begin(), mean.end(), t.matrix_.begin() + kUnk * dim);
  std::copy(mean.begin(), mean.end(), t.matrix_.begin() + kNoComp * dim);
  return t;
}

int EmbeddingTable::index(std::string_view token) const {
  auto it = vocab_.find(std::string(token));
  return it == vocab_.end() ? kUnk : it->second;
}

bool EmbeddingTable::contains(std::string_view token) const {
  return vocab_.count(std::string(token)) != 0;
}

std::span<const double> EmbeddingTable::row(int index) const {
  if (index < 0 || static_cast<std::size_t>(index) >= rows())
    throw DimensionError("embedding index " + std::to_string(index) + " out of range");
  return {matrix_.data() + static_cast<std::size_t>(index) * dim_, dim_};
}

EmbeddingTable parse_embeddings(std::string_view text, std::size_t dim) {
  std::vector<std::pair<std::string, std::vector<double>>> words;
  std::istringstream is{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) continue;
    std::vector<double> vec;
    std::string tok;
    while (ls >> tok) {
      double v = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw FormatError("embeddings line " + std::to_string(lineno) + ": bad value '" + tok + "'");
      vec.push_back(v);
    }
    if (dim == 0) dim = vec.size();
    if (vec.size() != dim || dim == 0)
      throw FormatError("embeddings line " + std::to_string(lineno) + ": expected " +
                        std::to_string(dim) + " values, found " + std::to_string(vec.size()));
    words.emplace_back(std::move(token), std::move(vec));
  }
  try {
    return EmbeddingTable::from_words(dim, words);
  } catch (const FormatError& e) {
    throw FormatError(std::string("embeddings: ") + e.what());
  }
}

EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open embeddings");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_embeddings(ss.str(), dim);
}

namespace {

IndexSentence encode_sentence(const Sentence& s, const EmbeddingTable& table,
                              std::size_t cap) {
  IndexSentence out;
  for (std::size_t i = 0; i < s.size() && i < cap; ++i) out.push_back(table.index(s[i]));
  return out;
}

std::vector<IndexSentence> encode_sentences(const std::vector<Sentence>& ss,
                                            const EmbeddingTable& table, std::size_t cap,
                                            std::size_t token_cap) {
  std::vector<IndexSentence> out;
  for (const auto& s : ss) {
    if (out.size() == cap) break;
    auto e = encode_sentence(s, table, token_cap);
    if (!e.empty()) out.push_back(std::move(e));
  }
  if (out.empty()) out.push_back({kNoComp});
  return out;
}

}  // namespace

EncodedItem encode_item(const NewsItem& item, const EmbeddingTable& table,
                        const EncodingCaps& caps) {
  EncodedItem e;
  e.id = item.id;
  e.label = item.label;
  e.headline = encode_sentence(item.headline, table, caps.tokens_per_sentence);
  if (e.headline.empty()) e.headline = {kNoComp};
  e.body = encode_sentences(item.body, table, caps.body_sentences, caps.tokens_per_sentence);
  e.comments = encode_sentences(item.comments, table, caps.comments, caps.tokens_per_sentence);
  for (std::size_t i = 0; i < item.image_refs.size() && i < caps.images; ++i)
    e.image_refs.push_back(item.image_refs[i]);
  return e;
}

}  // namespace ember::data
