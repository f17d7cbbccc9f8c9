#include "ember/image/ela.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <jpeglib.h>
#include <png.h>

#include "ember/error.hpp"
#include "ember/numerics/rng.hpp"

namespace ember::image {

namespace {

// libjpeg reports fatal errors through error_exit, which must not return.
struct JpegError {
  jpeg_error_mgr mgr;
  std::jmp_buf jump;
  char message[JMSG_LENGTH_MAX];
};

void jpeg_error_exit(j_common_ptr cinfo) {
  auto* err = reinterpret_cast<JpegError*>(cinfo->err);
  (*cinfo->err->format_message)(cinfo, err->message);
  std::longjmp(err->jump, 1);
}

void jpeg_silence(j_common_ptr, int) {}

}  // namespace

ImageFormat sniff_format(std::span<const std::uint8_t> b) {
  if (b.size() >= 3 && b[0] == 0xFF && b[1] == 0xD8 && b[2] == 0xFF) return ImageFormat::Jpeg;
  if (b.size() >= 8 && b[0] == 0x89 && b[1] == 'P' && b[2] == 'N' && b[3] == 'G')
    return ImageFormat::Png;
  if (b.size() >= 2 && b[0] == 'P' && (b[1] == '5' || b[1] == '6')) return ImageFormat::Pnm;
  return ImageFormat::Unknown;
}

bool is_lossy(ImageFormat f) { return f == ImageFormat::Jpeg; }

RgbImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  jpeg_decompress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silence;
  RgbImage img;
  if (setjmp(err.jump)) {
    jpeg_destroy_decompress(&cinfo);
    throw DecodeError(std::string("jpeg: ") + err.message);
  }
  jpeg_create_decompress(&cinfo);
  jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
  jpeg_read_header(&cinfo, TRUE);
  cinfo.out_color_space = JCS_RGB;
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_start_decompress(&cinfo);
  img.width = cinfo.output_width;
  img.height = cinfo.output_height;
  img.pixels.resize(img.width * img.height * 3);
  while (cinfo.output_scanline < cinfo.output_height) {
    JSAMPROW row = img.pixels.data() + cinfo.output_scanline * img.width * 3;
    jpeg_read_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_decompress(&cinfo);
  jpeg_destroy_decompress(&cinfo);
  return img;
}

std::vector<std::uint8_t> encode_jpeg(const RgbImage& img, int quality) {
  if (img.width == 0 || img.height == 0 || img.pixels.size() != img.width * img.height * 3)
    throw DecodeError("jpeg: cannot encode an empty or inconsistent raster");
  jpeg_compress_struct cinfo{};
  JpegError err{};
  cinfo.err = jpeg_std_error(&err.mgr);
  err.mgr.error_exit = jpeg_error_exit;
  err.mgr.emit_message = jpeg_silence;
  unsigned char* out = nullptr;
  unsigned long out_size = 0;
  if (setjmp(err.jump)) {
    jpeg_destroy_compress(&cinfo);
    std::free(out);
    throw DecodeError(std::string("jpeg: ") + err.message);
  }
  jpeg_create_compress(&cinfo);
  jpeg_mem_dest(&cinfo, &out, &out_size);
  cinfo.image_width = static_cast<JDIMENSION>(img.width);
  cinfo.image_height = static_cast<JDIMENSION>(img.height);
  cinfo.input_components = 3;
  cinfo.in_color_space = JCS_RGB;
  jpeg_set_defaults(&cinfo);
  cinfo.dct_method = JDCT_ISLOW;
  jpeg_set_quality(&cinfo, std::clamp(quality, 1, 100), TRUE);
  jpeg_start_compress(&cinfo, TRUE);
  while (cinfo.next_scanline < cinfo.image_height) {
    auto* row = const_cast<JSAMPROW>(img.pixels.data() + cinfo.next_scanline * img.width * 3);
    jpeg_write_scanlines(&cinfo, &row, 1);
  }
  jpeg_finish_compress(&cinfo);
  std::vector<std::uint8_t> bytes(out, out + out_size);
  jpeg_destroy_compress(&cinfo);
  std::free(out);
  return bytes;
}

RgbImage decode_png(std::span<const std::uint8_t> bytes) {
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&png, bytes.data(), bytes.size()))
    throw DecodeError(std::string("png: ") + png.message);
  png.format = PNG_FORMAT_RGB;
  RgbImage img;
  img.width = png.width;
  img.height = png.height;
  img.pixels.resize(PNG_IMAGE_SIZE(png));
  if (!png_image_finish_read(&png, nullptr, img.pixels.data(), 0, nullptr)) {
    std::string msg = png.message;
    png_image_free(&png);
    throw DecodeError("png: " + msg);
  }
  return img;
}

std::vector<std::uint8_t> encode_png_gray(std::size_t width, std::size_t height,
                                          std::span<const std::uint8_t> gray) {
  if (gray.size() != width * height) throw DecodeError("png: gray buffer size mismatch");
  png_image png{};
  png.version = PNG_IMAGE_VERSION;
  png.width = static_cast<png_uint_32>(width);
  png.height = static_cast<png_uint_32>(height);
  png.format = PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&png, nullptr, &size, 0, gray.data(), 0, nullptr))
    throw DecodeError(std::string("png: ") + png.message);
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&png, out.data(), &size, 0, gray.data(), 0, nullptr))
    throw DecodeError(std::string("png: ") + png.message);
  out.resize(size);
  return out;
}

RgbImage decode_pnm(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 2;
  auto skip = [&] {
    while (pos < bytes.size()) {
      if (std::isspace(bytes[pos])) {
        ++pos;
      } else if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
  };
  auto number = [&] {
    skip();
    std::size_t v = 0;
    bool any = false;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      any = true;
    }
    if (!any) throw DecodeError("pnm: malformed header");
    return v;
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw DecodeError("pnm: not a binary PGM/PPM");
  const bool color = bytes[1] == '6';
  RgbImage img;
  img.width = number();
  img.height = number();
  if (number() != 255) throw DecodeError("pnm: only maxval 255 is supported");
  ++pos;  // single whitespace before raster
  const std::size_t channels = color ? 3 : 1;
  if (bytes.size() < pos + img.width * img.height * channels)
    throw DecodeError("pnm: truncated raster");
  img.pixels.resize(img.width * img.height * 3);
  for (std::size_t i = 0; i < img.width * img.height; ++i)
    for (std::size_t c = 0; c < 3; ++c)
      img.pixels[i * 3 + c] = bytes[pos + i * channels + (color ? c : 0)];
  return img;
}

RgbImage decode_image(std::span<const std::uint8_t> bytes) {
  switch (sniff_format(bytes)) {
    case ImageFormat::Jpeg: return decode_jpeg(bytes);
    case ImageFormat::Png: return decode_png(bytes);
    case ImageFormat::Pnm: return decode_pnm(bytes);
    case ImageFormat::Unknown: break;
  }
  throw DecodeError("unrecognised image format");
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError(path.string(), "cannot open file");
  return {std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError(path.string(), "cannot write file");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

double ElaMap::mean() const {
  if (magnitude.empty()) return 0.0;
  double s = 0;
  for (double v : magnitude) s += v;
  return s / static_cast<double>(magnitude.size());
}

double ElaMap::mean_in(std::size_t x0, std::size_t y0, std::size_t x1, std::size_t y1) const {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t y = y0; y < std::min(y1, height); ++y)
    for (std::size_t x = x0; x < std::min(x1, width); ++x, ++n) s += at(x, y);
  return n ? s / static_cast<double>(n) : 0.0;
}

double ElaMap::mean_outside(std::size_t x0, std::size_t y0, std::size_t x1,
                            std::size_t y1) const {
  double s = 0;
  std::size_t n = 0;
  for (std::size_t y = 0; y < height; ++y)
    for (std::size_t x = 0; x < width; ++x) {
      if (x >= x0 && x < x1 && y >= y0 && y < y1) continue;
      s += at(x, y);
      ++n;
    }
  return n ? s / static_cast<double>(n) : 0.0;
}

int ela_quality(double r) {
  if (!(r > 0.0 && r < 1.0)) throw ConfigError("error level must lie in (0, 1)");
  return static_cast<int>(std::lround((1.0 - r) * 100.0));
}

ElaMap ela_of_decoded(const RgbImage& original, double error_level) {
  const int q = ela_quality(error_level);
  const RgbImage again = decode_jpeg(encode_jpeg(original, q));
  ElaMap map;
  map.width = original.width;
  map.height = original.height;
  map.magnitude.resize(map.width * map.height);
  for (std::size_t i = 0; i < map.magnitude.size(); ++i) {
    int worst = 0;
    for (std::size_t c = 0; c < 3; ++c)
      worst = std::max(worst, std::abs(int(original.pixels[i * 3 + c]) - int(again.pixels[i * 3 + c])));
    map.magnitude[i] = worst / 255.0;
  }
  return map;
}

ElaMap ela(std::span<const std::uint8_t> bytes, double error_level) {
  const auto format = sniff_format(bytes);
  RgbImage decoded = decode_image(bytes);
  if (!is_lossy(format)) decoded = decode_jpeg(encode_jpeg(decoded, kLosslessSourceQuality));
  return ela_of_decoded(decoded, error_level);
}

std::vector<std::uint8_t> ela_heatmap(const ElaMap& map, double gain) {
  std::vector<std::uint8_t> gray(map.magnitude.size());
  for (std::size_t i = 0; i < gray.size(); ++i)
    gray[i] = static_cast<std::uint8_t>(
        std::clamp(std::lround(map.magnitude[i] * gain * 255.0), 0L, 255L));
  return gray;
}

std::vector<double> ela_feature(const ElaMap& map, std::size_t width, std::uint64_t seed) {
  constexpr std::size_t kGrid = 32;
  std::vector<double> pooled(kGrid * kGrid, 0.0);
  if (map.width > 0 && map.height > 0) {
    for (std::size_t gy = 0; gy < kGrid; ++gy)
      for (std::size_t gx = 0; gx < kGrid; ++gx) {
        const std::size_t x0 = gx * map.width / kGrid, x1 = std::max(x0 + 1, (gx + 1) * map.width / kGrid);
        const std::size_t y0 = gy * map.height / kGrid, y1 = std::max(y0 + 1, (gy + 1) * map.height / kGrid);
        pooled[gy * kGrid + gx] = map.mean_in(x0, y0, x1, y1);
      }
  }
  num::Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(pooled.size()));
  std::vector<double> out(width, 0.0);
  for (std::size_t i = 0; i < width; ++i)
    for (double p : pooled) out[i] += scale * rng.normal() * p;
  return out;
}

}  // namespace ember::image
