#include "ember/data/split.hpp"

#include <iostream>
#include <numeric>

#include "ember/error.hpp"
#include "ember/numerics/rng.hpp"

namespace ember::data {

SplitIndices split_indices(std::size_t n, const SplitSpec& spec) {
  if (n < 10) throw ConfigError("splitting needs at least 10 items, got " + std::to_string(n));
  const std::size_t total = spec.ratios[0] + spec.ratios[1] + spec.ratios[2];
  if (total == 0) throw ConfigError("split ratios sum to zero");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  num::Rng rng(spec.seed);
  rng.shuffle(order);
  const std::size_t n_train = n * spec.ratios[0] / total;
  const std::size_t n_val = n * spec.ratios[1] / total;
  SplitIndices s;
  s.train.assign(order.begin(), order.begin() + n_train);
  s.val.assign(order.begin() + n_train, order.begin() + n_train + n_val);
  s.test.assign(order.begin() + n_train + n_val, order.end());
  return s;
}

DatasetSplit split_dataset(const std::vector<NewsItem>& items, const SplitSpec& spec) {
  const auto idx = split_indices(items.size(), spec);
  DatasetSplit out;
  auto take = [&](const std::vector<std::size_t>& ids, std::vector<NewsItem>& dst,
                  const char* name) {
    std::size_t real = 0;
    for (auto i : ids) {
      dst.push_back(items[i]);
      real += items[i].label == 1;
    }
    if (!dst.empty() && (real == 0 || real == dst.size())) {
      out.warnings.push_back(std::string(name) + " split contains a single class");
      std::cerr << "warning: " << out.warnings.back() << '\n';
    }
  };
  take(idx.train, out.train, "train");
  take(idx.val, out.val, "validation");
  take(idx.test, out.test, "test");
  return out;
}

}  // namespace ember::data
