#include "ember/data/synthetic.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>

#include "ember/error.hpp"
#include "ember/numerics/rng.hpp"

namespace ember::data {

namespace {

// Four decimals keeps feature files compact; values are stored rounded so the
// in-memory corpus equals what a reader of the written files sees.
double round4(double v) { return std::round(v * 1e4) / 1e4; }

std::vector<double> gaussian(num::Rng& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * rng.normal();
  return v;
}

std::string topic_word(std::size_t topic, std::size_t j) {
  return "t" + std::to_string(topic) + "w" + std::to_string(j);
}

class Generator {
 public:
  Generator(const SyntheticOptions& o, num::Rng& rng) : o_(o), rng_(rng) {}

  // ceil(0.6 * len) topic words, the rest filler, in random order.
  Sentence sentence(std::size_t topic, std::size_t min_len, std::size_t max_len) {
    const std::size_t len = min_len + rng_.index(max_len - min_len + 1);
    const std::size_t n_topic = (len * 6 + 9) / 10;
    Sentence s;
    for (std::size_t i = 0; i < len; ++i)
      s.push_back(i < n_topic ? topic_word(topic, rng_.index(o_.words_per_topic))
                              : "fw" + std::to_string(rng_.index(o_.filler_words)));
    rng_.shuffle(s);
    return s;
  }

 private:
  const SyntheticOptions& o_;
  num::Rng& rng_;
};

}  // namespace

EmbeddingTable SyntheticCorpus::embedding_table() const {
  return EmbeddingTable::from_words(words.empty() ? 0 : words.front().second.size(), words);
}

std::string serialize_embeddings(
    const std::vector<std::pair<std::string, std::vector<double>>>& words) {
  std::string out;
  char buf[32];
  for (const auto& [tok, vec] : words) {
    out += tok;
    for (double v : vec) {
      out += ' ';
      out.append(buf, std::to_chars(buf, buf + sizeof buf, v).ptr);
    }
    out += '\n';
  }
  return out;
}

SyntheticCorpus generate_synthetic(const SyntheticOptions& o) {
  if (o.n < 20) throw ConfigError("synthetic corpus needs n >= 20");
  if (o.topics < 2) throw ConfigError("synthetic corpus needs at least two topics");
  if (o.mismatch_rate < 0.0 || o.mismatch_rate > 1.0)
    throw ConfigError("mismatch rate must lie in [0, 1]");

  num::Rng rng(o.seed);
  SyntheticCorpus c;
  c.features = image::ImageFeatureTable(o.image_width);

  // Word vectors: topic centre plus a small per-word offset; fillers are
  // unrelated to every topic.
  const double word_scale = 1.0 / std::sqrt(static_cast<double>(o.word_dim));
  for (std::size_t k = 0; k < o.topics; ++k) {
    auto centre = gaussian(rng, o.word_dim, 2.0 * word_scale);
    for (std::size_t j = 0; j < o.words_per_topic; ++j) {
      auto v = gaussian(rng, o.word_dim, 0.5 * word_scale);
      for (std::size_t i = 0; i < o.word_dim; ++i) v[i] = round4(v[i] + centre[i]);
      c.words.emplace_back(topic_word(k, j), std::move(v));
    }
  }
  for (std::size_t j = 0; j < o.filler_words; ++j) {
    auto v = gaussian(rng, o.word_dim, 2.0 * word_scale);
    for (auto& x : v) x = round4(x);
    c.words.emplace_back("fw" + std::to_string(j), std::move(v));
  }

  std::vector<std::vector<double>> ela_centroids;
  for (std::size_t k = 0; k < o.topics; ++k) {
    c.image_centroids.push_back(gaussian(rng, o.image_width, 1.0));
    ela_centroids.push_back(gaussian(rng, o.image_width, 1.0));
  }

  const auto n_fake = static_cast<std::size_t>(std::llround(o.mismatch_rate * static_cast<double>(o.n)));
  std::vector<int> labels(o.n, 1);
  std::fill(labels.begin(), labels.begin() + static_cast<std::ptrdiff_t>(n_fake), 0);
  rng.shuffle(labels);

  Generator gen(o, rng);
  for (std::size_t i = 0; i < o.n; ++i) {
    const int base = static_cast<int>(rng.index(o.topics));
    std::array<int, 4> topic{base, base, base, base};
    if (labels[i] == 0) {
      std::array<std::size_t, 4> comps{0, 1, 2, 3};
      rng.shuffle(comps);
      const std::size_t swapped = 1 + rng.index(2);
      for (std::size_t s = 0; s < swapped; ++s) {
        int other = static_cast<int>(rng.index(o.topics - 1));
        if (other >= base) ++other;
        topic[comps[s]] = other;
      }
    }

    NewsItem item;
    char id[32];
    std::snprintf(id, sizeof id, "syn-%05zu", i);
    item.id = id;
    item.label = labels[i];
    item.headline = gen.sentence(topic[0], 6, 10);
    const std::size_t n_comments = 1 + rng.index(3);
    for (std::size_t j = 0; j < n_comments; ++j) item.comments.push_back(gen.sentence(topic[2], 4, 8));
    const std::size_t n_sent = 2 + rng.index(3);
    for (std::size_t j = 0; j < n_sent; ++j) item.body.push_back(gen.sentence(topic[3], 6, 10));
    const std::size_t n_images = 1 + rng.index(2);
    for (std::size_t j = 0; j < n_images; ++j) {
      image::ImageFeature f;
      f.id = item.id + "-img" + std::to_string(j);
      f.has_original = f.has_ela = true;
      f.original = gaussian(rng, o.image_width, 0.5);
      f.ela = gaussian(rng, o.image_width, 0.5);
      for (std::size_t d = 0; d < o.image_width; ++d) {
        f.original[d] = round4(f.original[d] + c.image_centroids[topic[1]][d]);
        f.ela[d] = round4(f.ela[d] + ela_centroids[topic[1]][d]);
      }
      item.image_refs.push_back(f.id);
      c.features.add(std::move(f));
    }
    c.items.push_back(std::move(item));
    c.topics.push_back(topic);
  }
  return c;
}

}  // namespace ember::data
