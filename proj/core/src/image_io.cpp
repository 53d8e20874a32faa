#include "colorgs/image_io.hpp"

#include "colorgs/errors.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace colorgs {

namespace {

std::uint8_t to_byte(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
}

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f != nullptr) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

std::vector<std::uint8_t> to_rgb8(const Image& rgb) {
  std::vector<std::uint8_t> bytes(rgb.pixel_count() * 3);
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(rgb.data[i]);
  return bytes;
}

void write_png(const std::filesystem::path& path, const Image& rgb) {
  FilePtr fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DatasetError(path.string(), "cannot open for writing");
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw DatasetError(path.string(), "libpng initialization failed");
  }
  std::vector<std::uint8_t> bytes = to_rgb8(rgb);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DatasetError(path.string(), "PNG encoding failed");
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(rgb.width), static_cast<png_uint_32>(rgb.height), 8,
               PNG_COLOR_TYPE_RGB, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < rgb.height; ++y) {
    png_write_row(png, bytes.data() + static_cast<std::size_t>(y) * static_cast<std::size_t>(rgb.width) * 3);
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

Image read_png(const std::filesystem::path& path) {
  FilePtr fp(std::fopen(path.c_str(), "rb"));
  if (!fp) throw DatasetError(path.string(), "missing file");
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DatasetError(path.string(), "libpng initialization failed");
  }
  Image img;
  std::vector<std::uint8_t> row;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw DatasetError(path.string(), "PNG decoding failed");
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);
  const png_byte bit_depth = png_get_bit_depth(png, info);
  const png_byte color_type = png_get_color_type(png, info);
  if (bit_depth == 16) png_set_strip_16(png);
  if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
  if (color_type == PNG_COLOR_TYPE_GRAY || color_type == PNG_COLOR_TYPE_GRAY_ALPHA) {
    if (bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    png_set_gray_to_rgb(png);
  }
  if ((color_type & PNG_COLOR_MASK_ALPHA) != 0) png_set_strip_alpha(png);
  png_read_update_info(png, info);
  const int width = static_cast<int>(png_get_image_width(png, info));
  const int height = static_cast<int>(png_get_image_height(png, info));
  img = Image(width, height, 3);
  row.resize(png_get_rowbytes(png, info));
  for (int y = 0; y < height; ++y) {
    png_read_row(png, row.data(), nullptr);
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        img.at(x, y, c) = static_cast<double>(row[static_cast<std::size_t>(x) * 3 + static_cast<std::size_t>(c)]) / 255.0;
      }
    }
  }
  png_destroy_read_struct(&png, &info, nullptr);
  return img;
}

// Reads a netpbm-style header: magic, then `count` integers, skipping comments.
std::vector<long> read_header_ints(std::istream& in, int count) {
  std::vector<long> values;
  while (static_cast<int>(values.size()) < count) {
    in >> std::ws;
    if (in.peek() == '#') {
      std::string line;
      std::getline(in, line);
      continue;
    }
    long v = 0;
    if (!(in >> v)) break;
    values.push_back(v);
  }
  in.get();  // single whitespace before the raster
  return values;
}

Image read_netpbm(const std::filesystem::path& path, const std::string& magic, int channels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(path.string(), "missing file");
  std::string m;
  in >> m;
  if (m != magic) throw DatasetError(path.string(), "expected " + magic + " header");
  const std::vector<long> h = read_header_ints(in, 3);
  if (h.size() != 3 || h[0] <= 0 || h[1] <= 0 || h[2] != 255) {
    throw DatasetError(path.string(), "unsupported " + magic + " header");
  }
  Image img(static_cast<int>(h[0]), static_cast<int>(h[1]), channels);
  std::vector<unsigned char> bytes(img.data.size());
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw DatasetError(path.string(), "truncated raster");
  }
  for (std::size_t i = 0; i < bytes.size(); ++i) img.data[i] = static_cast<double>(bytes[i]) / 255.0;
  return img;
}

void write_netpbm(const std::filesystem::path& path, const std::string& magic, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(path.string(), "cannot open for writing");
  out << magic << '\n' << img.width << ' ' << img.height << "\n255\n";
  std::vector<unsigned char> bytes(img.data.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(img.data[i]);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

float to_little_endian(float v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
  bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
  return std::bit_cast<float>(bits);
}

}  // namespace

void write_color(const std::filesystem::path& path, const Image& rgb) {
  if (rgb.channels != 3) throw ConfigurationError("color image must have 3 channels");
  if (path.extension() == ".ppm") {
    write_netpbm(path, "P6", rgb);
  } else {
    write_png(path, rgb);
  }
}

Image read_color(const std::filesystem::path& path) {
  if (path.extension() == ".ppm") return read_netpbm(path, "P6", 3);
  return read_png(path);
}

void write_pfm(const std::filesystem::path& path, const Image& gray) {
  if (gray.channels != 1) throw ConfigurationError("PFM writer expects a single channel");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DatasetError(path.string(), "cannot open for writing");
  out << "Pf\n" << gray.width << ' ' << gray.height << "\n-1.0\n";
  std::vector<float> row(static_cast<std::size_t>(gray.width));
  for (int y = gray.height - 1; y >= 0; --y) {
    for (int x = 0; x < gray.width; ++x) {
      row[static_cast<std::size_t>(x)] = to_little_endian(static_cast<float>(gray.at(x, y)));
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
  }
}

Image read_pfm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError(path.string(), "missing file");
  std::string magic;
  in >> magic;
  if (magic != "Pf") throw DatasetError(path.string(), "expected single-channel PFM");
  int width = 0, height = 0;
  double scale = 0.0;
  in >> width >> height >> scale;
  in.get();
  if (!in || width <= 0 || height <= 0 || scale == 0.0) {
    throw DatasetError(path.string(), "malformed PFM header");
  }
  const bool little = scale < 0.0;
  Image img(width, height, 1);
  std::vector<float> row(static_cast<std::size_t>(width));
  for (int y = height - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size() * sizeof(float)));
    if (!in) throw DatasetError(path.string(), "truncated PFM raster");
    for (int x = 0; x < width; ++x) {
      float v = row[static_cast<std::size_t>(x)];
      if (little != (std::endian::native == std::endian::little)) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(v);
        bits = ((bits & 0xFFu) << 24) | ((bits & 0xFF00u) << 8) | ((bits >> 8) & 0xFF00u) | (bits >> 24);
        v = std::bit_cast<float>(bits);
      }
      img.at(x, y) = static_cast<double>(v);
    }
  }
  return img;
}

void write_mask(const std::filesystem::path& path, const Image& mask) {
  Image binary = mask;
  for (double& v : binary.data) v = v != 0.0 ? 1.0 : 0.0;
  write_netpbm(path, "P5", binary);
}

Image read_mask(const std::filesystem::path& path) {
  Image img = read_netpbm(path, "P5", 1);
  for (double& v : img.data) v = v != 0.0 ? 1.0 : 0.0;
  return img;
}

}  // namespace colorgs
