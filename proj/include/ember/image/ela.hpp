#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace ember::image {

// 8-bit interleaved RGB raster.
struct RgbImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;  // width * height * 3

  std::uint8_t* at(std::size_t x, std::size_t y) { return &pixels[(y * width + x) * 3]; }
  const std::uint8_t* at(std::size_t x, std::size_t y) const {
    return &pixels[(y * width + x) * 3];
  }
};

enum class ImageFormat { Jpeg, Png, Pnm, Unknown };

ImageFormat sniff_format(std::span<const std::uint8_t> bytes);
bool is_lossy(ImageFormat f);

// Decoders throw DecodeError on malformed input.
RgbImage decode_image(std::span<const std::uint8_t> bytes);
RgbImage decode_jpeg(std::span<const std::uint8_t> bytes);
RgbImage decode_png(std::span<const std::uint8_t> bytes);
RgbImage decode_pnm(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> encode_jpeg(const RgbImage& img, int quality);
std::vector<std::uint8_t> encode_png_gray(std::size_t width, std::size_t height,
                                          std::span<const std::uint8_t> gray);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

// Per-pixel error level: max over channels of |original - recompressed| / 255.
struct ElaMap {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> magnitude;

  double at(std::size_t x, std::size_t y) const { return magnitude[y * width + x]; }
  double mean() const;
  // Mean over the half-open rectangle [x0, x1) x [y0, y1).
  double mean_in(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) const;
  // Mean over everything outside that rectangle.
  double mean_outside(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) const;
};

inline constexpr double kDefaultErrorLevel = 0.3;
inline constexpr int kLosslessSourceQuality = 95;

// Error level r maps to recompression quality round((1 - r) * 100).
int ela_quality(double error_level);

// Runs error level analysis on encoded image bytes. Sources in a lossless
// format are first encoded once at quality 95.
ElaMap ela(std::span<const std::uint8_t> bytes, double error_level = kDefaultErrorLevel);
// Same on an already decoded raster that is treated as the lossy original.
ElaMap ela_of_decoded(const RgbImage& original, double error_level = kDefaultErrorLevel);

// Grayscale rendering of the map, magnitude * gain * 255 clamped to [0, 255].
std::vector<std::uint8_t> ela_heatmap(const ElaMap& map, double gain = 1.0);

// Fixed-width descriptor of an ELA map for pipelines without a backbone:
// the map is mean-pooled onto a 32x32 grid and projected to `width` values
// through a Gaussian matrix drawn from `seed`.
std::vector<double> ela_feature(const ElaMap& map, std::size_t width, std::uint64_t seed);

}  // namespace ember::image
