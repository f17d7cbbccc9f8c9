#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ember::image {

// Backbone vectors for one image: the original picture and its error level
// analysis rendering. Either half may be absent.
struct ImageFeature {
  std::string id;
  std::vector<double> original;
  std::vector<double> ela;
  bool has_original = false;
  bool has_ela = false;

  friend bool operator==(const ImageFeature&, const ImageFeature&) = default;
};

// Feature file layout:
//
//   # ember-image-features width=<W> count=<N>
//   <id> <has_original 0|1> <has_ela 0|1> <W original values> <W ela values>
//
// Values use the shortest round-trip decimal form, so reading back what was
// written reproduces every double exactly. Absent halves are written as zeros.
class ImageFeatureTable {
 public:
  explicit ImageFeatureTable(std::size_t width = 1024) : width_(width) {}

  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return rows_.size(); }
  bool empty() const noexcept { return rows_.empty(); }

  // Throws FormatError on width mismatch or duplicate id.
  void add(ImageFeature feature);
  const ImageFeature* find(const std::string& id) const;
  const std::vector<ImageFeature>& rows() const noexcept { return rows_; }

  friend bool operator==(const ImageFeatureTable& a, const ImageFeatureTable& b) {
    return a.width_ == b.width_ && a.rows_ == b.rows_;
  }

 private:
  std::size_t width_;
  std::vector<ImageFeature> rows_;
  std::map<std::string, std::size_t> index_;
};

std::string serialize_image_features(const ImageFeatureTable& table);
ImageFeatureTable parse_image_features(const std::string& text);

void save_image_features(const std::filesystem::path& path, const ImageFeatureTable& table);
// `expected_width`, when given, must match the header (config error otherwise).
ImageFeatureTable load_image_features(const std::filesystem::path& path,
                                      std::optional<std::size_t> expected_width = {});

}  // namespace ember::image
