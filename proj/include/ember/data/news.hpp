#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ember::data {

using Sentence = std::vector<std::string>;

// One article: label 1 = real, 0 = fake.
struct NewsItem {
  std::string id;
  int label = 1;
  Sentence headline;
  std::vector<Sentence> body;
  std::vector<Sentence> comments;
  std::vector<std::string> image_refs;

  friend bool operator==(const NewsItem&, const NewsItem&) = default;
};

// Lowercases and splits on whitespace and punctuation; punctuation is dropped.
Sentence tokenize(std::string_view text);
// Splits on '.', '!' or '?' followed by whitespace (or end of text), then
// tokenizes each sentence. Sentences without tokens are dropped.
std::vector<Sentence> split_sentences(std::string_view text);

// Corpus files hold one JSON object per line:
//
//   {"id": "...", "label": 0|1, "headline": [...], "body": [[...], ...],
//    "comments": [[...], ...], "image_refs": ["...", ...]}
//
// Text fields may also be given as raw strings, which are tokenized on load
// (headline and comments as single sentences, body via split_sentences).
// Writing always emits the tokenized form, so write(load(x)) == x for files
// already in that form.
std::vector<NewsItem> parse_corpus(std::string_view text);
std::vector<NewsItem> load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const std::vector<NewsItem>& items);
void save_corpus(const std::filesystem::path& path, const std::vector<NewsItem>& items);

}  // namespace ember::data
