#include <doctest.h>

#include <filesystem>

#include "ember/error.hpp"
#include "ember/image/ela.hpp"
#include "ember/image/features.hpp"
#include "fixtures.hpp"

using namespace ember;
using namespace ember::image;
using ember::testing::solid_image;
using ember::testing::tampered_fixture;
using ember::testing::textured_image;

TEST_CASE("feature table files") {
  SUBCASE("empty table keeps its header") {
    ImageFeatureTable t(4);
    const auto text = serialize_image_features(t);
    CHECK(text.rfind("# ember-image-features width=4 count=0", 0) == 0);
    CHECK(parse_image_features(text) == t);
  }

  SUBCASE("round trip is exact") {
    ImageFeatureTable t(3);
    t.add({"a", {0.1, -2.5e-7, 3.0}, {1.0 / 3.0, 0, 7}, true, true});
    t.add({"b", {0, 0, 0}, {4, 5, 6}, false, true});
    const auto back = parse_image_features(serialize_image_features(t));
    CHECK(back == t);
    CHECK(back.find("a")->original[1] == -2.5e-7);
    CHECK(back.find("missing") == nullptr);
  }

  SUBCASE("width mismatches") {
    ImageFeatureTable t(3);
    CHECK_THROWS_AS(t.add({"x", {1, 2}, {1, 2, 3}, true, true}), FormatError);
    t.add({"x", {1, 2, 3}, {1, 2, 3}, true, true});
    CHECK_THROWS_AS(t.add({"x", {1, 2, 3}, {1, 2, 3}, true, true}), FormatError);
    const auto path = std::filesystem::temp_directory_path() / "ember_features_test.txt";
    save_image_features(path, t);
    CHECK(load_image_features(path, 3) == t);
    CHECK_THROWS_AS(load_image_features(path, 1024), ConfigError);
    std::filesystem::remove(path);
  }

  SUBCASE("row width is checked against the header") {
    CHECK_THROWS_AS(parse_image_features("# ember-image-features width=2 count=1\nx 1 1 1 2 3\n"),
                    FormatError);
  }
}

TEST_CASE("codec round trips") {
  const auto img = textured_image(40, 24, 3);
  CHECK(sniff_format(encode_jpeg(img, 90)) == ImageFormat::Jpeg);
  const auto back = decode_image(encode_jpeg(img, 90));
  CHECK(back.width == 40);
  CHECK(back.height == 24);
  const auto ppm = decode_image(ember::testing::encode_ppm(img));
  CHECK(ppm.pixels == img.pixels);
  std::vector<std::uint8_t> gray(12, 7);
  const auto png = encode_png_gray(4, 3, gray);
  CHECK(sniff_format(png) == ImageFormat::Png);
  const auto g = decode_png(png);
  CHECK(g.width == 4);
  CHECK(g.pixels[0] == 7);
  CHECK_THROWS_AS(decode_image(std::vector<std::uint8_t>{1, 2, 3, 4}), DecodeError);
  const auto full = encode_jpeg(img, 90);
  const std::vector<std::uint8_t> truncated(full.begin(), full.begin() + 40);
  CHECK_THROWS_AS(decode_image(truncated), DecodeError);
}

TEST_CASE("error level analysis") {
  CHECK(ela_quality(0.3) == 70);
  CHECK_THROWS_AS(ela_quality(0.0), ConfigError);
  CHECK_THROWS_AS(ela_quality(1.0), ConfigError);

  SUBCASE("solid colour is nearly lossless") {
    const auto m = ela(encode_jpeg(solid_image(64, 64, 120, 80, 200), 95));
    CHECK(m.mean() < 0.02);
  }

  SUBCASE("an image already saved at the ELA quality shows less error") {
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const auto img = textured_image(96, 96, seed);
      const double at70 = ela(encode_jpeg(img, 70)).mean();
      const double at95 = ela(encode_jpeg(img, 95)).mean();
      CHECK(at70 < at95);
    }
  }

  SUBCASE("spliced patch stands out") {
    for (int i = 0; i < 5; ++i) {
      const auto f = tampered_fixture(i);
      const auto m = ela(f.bytes);
      CHECK(m.mean_in(f.x0, f.y0, f.x1, f.y1) > m.mean_outside(f.x0, f.y0, f.x1, f.y1));
    }
  }

  SUBCASE("deterministic and bounded") {
    const auto bytes = ember::testing::encode_ppm(textured_image(50, 30, 9, 40.0));
    const auto a = ela(bytes), b = ela(bytes);
    CHECK(a.magnitude == b.magnitude);
    for (double v : a.magnitude) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    const auto heat = ela_heatmap(a, 5.0);
    CHECK(heat.size() == 50 * 30);
  }

  SUBCASE("feature projection") {
    const auto m = ela(encode_jpeg(textured_image(64, 64, 4), 90));
    const auto f1 = ela_feature(m, 128, 11), f2 = ela_feature(m, 128, 11);
    CHECK(f1.size() == 128);
    CHECK(f1 == f2);
    CHECK(ela_feature(m, 128, 12) != f1);
  }
}
