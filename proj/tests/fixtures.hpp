#pragma once

// Generated image fixtures for the ELA suites.

#include <cmath>
#include <cstdint>
#include <vector>

#include "ember/image/ela.hpp"
#include "ember/numerics/rng.hpp"

namespace ember::testing {

inline image::RgbImage solid_image(std::size_t w, std::size_t h, std::uint8_t r, std::uint8_t g,
                                   std::uint8_t b) {
  image::RgbImage img{w, h, std::vector<std::uint8_t>(w * h * 3)};
  for (std::size_t i = 0; i < w * h; ++i) {
    img.pixels[3 * i] = r;
    img.pixels[3 * i + 1] = g;
    img.pixels[3 * i + 2] = b;
  }
  return img;
}

inline std::uint8_t clamp8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::fmin(255.0, std::fmax(0.0, v))));
}

// Smooth colour gradients with a few sinusoids and per-pixel noise, loosely
// photo-like so the codec has texture to work on.
inline image::RgbImage textured_image(std::size_t w, std::size_t h, std::uint64_t seed,
                                      double noise = 6.0) {
  num::Rng rng(seed);
  double fx[3], fy[3], ph[3], base[3];
  for (int c = 0; c < 3; ++c) {
    fx[c] = rng.uniform(0.02, 0.15);
    fy[c] = rng.uniform(0.02, 0.15);
    ph[c] = rng.uniform(0.0, 6.28);
    base[c] = rng.uniform(70, 180);
  }
  image::RgbImage img{w, h, std::vector<std::uint8_t>(w * h * 3)};
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c) {
        const double v = base[c] + 40.0 * std::sin(fx[c] * static_cast<double>(x) + ph[c]) *
                                       std::cos(fy[c] * static_cast<double>(y)) +
                         noise * rng.normal();
        img.at(x, y)[c] = clamp8(v);
      }
  return img;
}

struct TamperedFixture {
  std::vector<std::uint8_t> bytes;  // JPEG
  std::size_t x0, y0, x1, y1;       // spliced rectangle
};

inline std::vector<std::uint8_t> encode_ppm(const image::RgbImage& img) {
  const std::string header =
      "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

// A background that went through two JPEG saves, with a never-compressed
// textured patch pasted in and the result saved once more at quality 90.
inline TamperedFixture tampered_fixture(int index) {
  const std::size_t w = 160, h = 128;
  const auto seed = static_cast<std::uint64_t>(1000 + index);
  auto bg = image::decode_jpeg(image::encode_jpeg(textured_image(w, h, seed), 80));
  bg = image::decode_jpeg(image::encode_jpeg(bg, 75));
  const auto patch = textured_image(w, h, seed + 500, 12.0);
  num::Rng rng(seed);
  const std::size_t pw = 48 + rng.index(17), ph = 40 + rng.index(17);
  const std::size_t x0 = 8 + rng.index(w - pw - 16), y0 = 8 + rng.index(h - ph - 16);
  for (std::size_t y = y0; y < y0 + ph; ++y)
    for (std::size_t x = x0; x < x0 + pw; ++x)
      for (int c = 0; c < 3; ++c) bg.at(x, y)[c] = patch.at(x, y)[c];
  return {image::encode_jpeg(bg, 90), x0, y0, x0 + pw, y0 + ph};
}

}  // namespace ember::testing
