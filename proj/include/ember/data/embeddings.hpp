#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "ember/data/news.hpp"

namespace ember::data {

inline constexpr int kPad = 0;
inline constexpr int kUnk = 1;
inline constexpr int kNoComp = 2;
inline constexpr std::size_t kReservedRows = 3;

// Pretrained word vectors plus three reserved rows: PAD (zeros), UNK (mean of
// all loaded vectors) and NOCOMP (absent-component placeholder, initialised as
// a copy of UNK; the model learns its own copy).
class EmbeddingTable {
 public:
  EmbeddingTable() = default;
  explicit EmbeddingTable(std::size_t dim);

  // Rebuilds reserved rows from the words added so far.
  static EmbeddingTable from_words(std::size_t dim,
                                   const std::vector<std::pair<std::string, std::vector<double>>>& words);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t rows() const noexcept { return matrix_.size() / (dim_ ? dim_ : 1); }
  int index(std::string_view token) const;  // UNK when absent
  bool contains(std::string_view token) const;
  std::span<const double> row(int index) const;

 private:
  std::size_t dim_ = 0;
  std::unordered_map<std::string, int> vocab_;
  std::vector<double> matrix_;
};

// Reads `token v1 ... vd` lines. With dim == 0 the width is taken from the
// first line. Throws FormatError naming the line on a wrong value count or a
// duplicate token.
EmbeddingTable parse_embeddings(std::string_view text, std::size_t dim = 100);
EmbeddingTable load_embeddings(const std::filesystem::path& path, std::size_t dim = 100);

// Truncation caps applied when encoding text into indices.
struct EncodingCaps {
  std::size_t tokens_per_sentence = 32;
  std::size_t body_sentences = 16;
  std::size_t comments = 16;
  std::size_t images = 4;
};

using IndexSentence = std::vector<int>;

// A NewsItem mapped onto embedding indices. Absent text components become a
// single one-token NOCOMP sentence; image refs are kept (and capped) as given.
struct EncodedItem {
  std::string id;
  int label = 1;
  IndexSentence headline;
  std::vector<IndexSentence> body;
  std::vector<IndexSentence> comments;
  std::vector<std::string> image_refs;
};

EncodedItem encode_item(const NewsItem& item, const EmbeddingTable& table,
                        const EncodingCaps& caps = {});

}  // namespace ember::data
