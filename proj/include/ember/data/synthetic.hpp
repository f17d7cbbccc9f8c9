#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "ember/data/embeddings.hpp"
#include "ember/data/news.hpp"
#include "ember/image/features.hpp"

namespace ember::data {

// Desk-scale corpus with constructed ground truth. Every component of a real
// item is drawn from one latent topic (topic word clusters in text, a
// topic-aligned backbone vector for images). A fake item takes one or two of
// its components from other topics, so "do all components agree?" decides
// the label exactly.
struct SyntheticOptions {
  std::size_t n = 600;
  double mismatch_rate = 1.0 / 3.0;  // fraction of fake items (fake:real = 1:2)
  std::uint64_t seed = 1;
  // Two topics keep the space of fake topic combinations small enough to be
  // covered by a 600-item corpus; with more topics most fake combinations
  // never occur in training.
  std::size_t topics = 2;
  std::size_t word_dim = 100;
  std::size_t image_width = 1024;
  std::size_t words_per_topic = 30;
  std::size_t filler_words = 40;
};

struct SyntheticCorpus {
  std::vector<NewsItem> items;
  // Latent topic per item for H, I, C, B.
  std::vector<std::array<int, 4>> topics;
  image::ImageFeatureTable features;
  std::vector<std::pair<std::string, std::vector<double>>> words;
  // Per-topic centre of the original-image feature vectors.
  std::vector<std::vector<double>> image_centroids;

  EmbeddingTable embedding_table() const;
};

// Token naming: topic words are "t<k>w<j>", shared filler words "fw<j>".
SyntheticCorpus generate_synthetic(const SyntheticOptions& opts);

std::string serialize_embeddings(const std::vector<std::pair<std::string, std::vector<double>>>& words);

}  // namespace ember::data
