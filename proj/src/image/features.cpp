#include "ember/image/features.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include "ember/error.hpp"

namespace ember::image {

namespace {

constexpr std::string_view kMagic = "# ember-image-features";

void append_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

std::size_t header_field(const std::string& header, const std::string& key) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos)
    throw FormatError("image features line 1: header lacks '" + key + "'");
  std::size_t v = 0;
  const char* begin = header.data() + pos + key.size() + 1;
  auto res = std::from_chars(begin, header.data() + header.size(), v);
  if (res.ec != std::errc())
    throw FormatError("image features line 1: bad '" + key + "' value");
  return v;
}

}  // namespace

void ImageFeatureTable::add(ImageFeature f) {
  auto check = [&](const std::vector<double>& v, bool present, const char* half) {
    if (present && v.size() != width_)
      throw FormatError("image " + f.id + ": " + half + " vector has " +
                        std::to_string(v.size()) + " values, table width is " +
                        std::to_string(width_));
  };
  check(f.original, f.has_original, "original");
  check(f.ela, f.has_ela, "ela");
  if (!f.has_original) f.original.clear();
  if (!f.has_ela) f.ela.clear();
  if (index_.count(f.id)) throw FormatError("duplicate image id " + f.id);
  index_.emplace(f.id, rows_.size());
  rows_.push_back(std::move(f));
}

const ImageFeature* ImageFeatureTable::find(const std::string& id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &rows_[it->second];
}

std::string serialize_image_features(const ImageFeatureTable& table) {
  std::string out(kMagic);
  out += " width=" + std::to_string(table.width()) +
         " count=" + std::to_string(table.size()) + "\n";
  for (const auto& f : table.rows()) {
    out += f.id;
    out += f.has_original ? " 1" : " 0";
    out += f.has_ela ? " 1" : " 0";
    for (const auto* half : {&f.original, &f.ela}) {
      const bool present = half == &f.original ? f.has_original : f.has_ela;
      for (std::size_t i = 0; i < table.width(); ++i) {
        out += ' ';
        append_double(out, present ? (*half)[i] : 0.0);
      }
    }
    out += '\n';
  }
  return out;
}

ImageFeatureTable parse_image_features(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line.rfind(kMagic, 0) != 0)
    throw FormatError("image features line 1: missing header");
  const std::size_t width = header_field(line, "width");
  const std::size_t count = header_field(line, "count");
  ImageFeatureTable table(width);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ls(line);
    ImageFeature f;
    int has_o = -1, has_e = -1;
    ls >> f.id >> has_o >> has_e;
    if (!ls || (has_o != 0 && has_o != 1) || (has_e != 0 && has_e != 1))
      throw FormatError("image features line " + std::to_string(lineno) +
                        ": expected '<id> <0|1> <0|1> values...'");
    std::vector<double> values;
    values.reserve(2 * width);
    std::string tok;
    while (ls >> tok) {
      double v = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw FormatError("image features line " + std::to_string(lineno) +
                          ": bad value '" + tok + "'");
      values.push_back(v);
    }
    if (values.size() != 2 * width)
      throw FormatError("image features line " + std::to_string(lineno) + ": " +
                        std::to_string(values.size()) + " values, expected " +
                        std::to_string(2 * width) + " (width " + std::to_string(width) + ")");
    f.has_original = has_o == 1;
    f.has_ela = has_e == 1;
    if (f.has_original) f.original.assign(values.begin(), values.begin() + width);
    if (f.has_ela) f.ela.assign(values.begin() + width, values.end());
    table.add(std::move(f));
  }
  if (table.size() != count)
    throw FormatError("image features: header declares " + std::to_string(count) +
                      " rows, found " + std::to_string(table.size()));
  return table;
}

void save_image_features(const std::filesystem::path& path, const ImageFeatureTable& table) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot write image features");
  os << serialize_image_features(table);
}

ImageFeatureTable load_image_features(const std::filesystem::path& path,
                                      std::optional<std::size_t> expected_width) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open image features");
  std::stringstream ss;
  ss << is.rdbuf();
  auto table = parse_image_features(ss.str());
  if (expected_width && *expected_width != table.width())
    throw ConfigError("image feature width " + std::to_string(table.width()) +
                      " does not match configured width " + std::to_string(*expected_width));
  return table;
}

}  // namespace ember::image
