#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ember/data/news.hpp"

namespace ember::data {

struct SplitSpec {
  std::array<std::size_t, 3> ratios{8, 1, 1};  // train : val : test
  std::uint64_t seed = 0;
};

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;
};

// Seeded shuffle of 0..n-1 cut into floor(n*r0/R), floor(n*r1/R) and the
// remainder. Requires n >= 10.
SplitIndices split_indices(std::size_t n, const SplitSpec& spec);

struct DatasetSplit {
  std::vector<NewsItem> train;
  std::vector<NewsItem> val;
  std::vector<NewsItem> test;
  // Non-fatal findings, e.g. a split that contains a single class.
  std::vector<std::string> warnings;
};

DatasetSplit split_dataset(const std::vector<NewsItem>& items, const SplitSpec& spec);

}  // namespace ember::data
