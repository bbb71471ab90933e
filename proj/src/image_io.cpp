#include "lptv/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <png.h>

namespace lptv {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

Image from_bytes(const std::vector<std::uint8_t>& bytes, Index height, Index width) {
  Raster<double> pixels(height, width);
  for (Index i = 0; i < height; ++i) {
    for (Index j = 0; j < width; ++j) {
      pixels(i, j) = static_cast<double>(bytes[static_cast<std::size_t>(i * width + j)]);
    }
  }
  return Image(std::move(pixels));
}

std::vector<std::uint8_t> to_bytes(const Image& img) {
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(img.size()));
  for (Index i = 0; i < img.height(); ++i) {
    for (Index j = 0; j < img.width(); ++j) {
      bytes[static_cast<std::size_t>(i * img.width() + j)] = quantize_pixel(img(i, j));
    }
  }
  return bytes;
}

Image load_png(const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  if (png_image_begin_read_from_file(&image, path.c_str()) == 0) {
    throw std::runtime_error("load_grayscale: cannot read PNG " + path.string() + ": " +
                             image.message);
  }
  if ((image.format & (PNG_FORMAT_FLAG_COLOR | PNG_FORMAT_FLAG_COLORMAP)) != 0 ||
      (image.format & PNG_FORMAT_FLAG_ALPHA) != 0) {
    png_image_free(&image);
    throw std::runtime_error("load_grayscale: " + path.string() + " is not single-channel grayscale");
  }
  if ((image.format & PNG_FORMAT_FLAG_LINEAR) != 0) {
    png_image_free(&image);
    throw std::runtime_error("load_grayscale: " + path.string() + " is not 8-bit");
  }
  image.format = PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> bytes(PNG_IMAGE_SIZE(image));
  if (png_image_finish_read(&image, nullptr, bytes.data(), 0, nullptr) == 0) {
    throw std::runtime_error("load_grayscale: decoding " + path.string() + " failed: " +
                             image.message);
  }
  return from_bytes(bytes, image.height, image.width);
}

void save_png(const Image& img, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = to_bytes(img);
  png_image image;
  std::memset(&image, 0, sizeof(image));
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width());
  image.height = static_cast<png_uint_32>(img.height());
  image.format = PNG_FORMAT_GRAY;
  if (png_image_write_to_file(&image, path.c_str(), 0, bytes.data(), 0, nullptr) == 0) {
    throw std::runtime_error("save_grayscale: cannot write " + path.string() + ": " +
                             image.message);
  }
}

// Next whitespace-delimited PNM header token, skipping '#' comments.
std::string pnm_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

Image load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_grayscale: cannot open " + path.string());
  const std::string magic = pnm_token(in);
  if (magic == "P6" || magic == "P3") {
    throw std::runtime_error("load_grayscale: " + path.string() + " is a color PPM");
  }
  if (magic != "P5") throw std::runtime_error("load_grayscale: " + path.string() + " is not binary PGM");
  long width = 0, height = 0, maxval = 0;
  try {
    width = std::stol(pnm_token(in));
    height = std::stol(pnm_token(in));
    maxval = std::stol(pnm_token(in));
  } catch (const std::exception&) {
    throw std::runtime_error("load_grayscale: malformed PGM header in " + path.string());
  }
  if (maxval != 255) throw std::runtime_error("load_grayscale: only maxval 255 PGM is supported");
  if (width <= 0 || height <= 0) throw std::runtime_error("load_grayscale: bad PGM dimensions");
  std::vector<std::uint8_t> bytes(static_cast<std::size_t>(width * height));
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw std::runtime_error("load_grayscale: truncated PGM " + path.string());
  }
  return from_bytes(bytes, height, width);
}

void save_pgm(const Image& img, const std::filesystem::path& path) {
  const std::vector<std::uint8_t> bytes = to_bytes(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_grayscale: cannot write " + path.string());
  out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("save_grayscale: write failed for " + path.string());
}

}  // namespace

std::uint8_t quantize_pixel(double value) {
  const double clamped = std::clamp(value, 0.0, 255.0);
  return static_cast<std::uint8_t>(std::round(clamped));
}

Image load_grayscale(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("load_grayscale: no such file " + path.string());
  }
  const std::string ext = lower_extension(path);
  if (ext == ".png") return load_png(path);
  if (ext == ".pgm") return load_pgm(path);
  if (ext == ".f64") return load_raw(path);
  throw std::runtime_error("load_grayscale: unsupported format '" + ext + "'");
}

void save_grayscale(const Image& img, const std::filesystem::path& path) {
  const std::string ext = lower_extension(path);
  if (ext == ".png") return save_png(img, path);
  if (ext == ".pgm") return save_pgm(img, path);
  if (ext == ".f64") return save_raw(img, path);
  throw std::runtime_error("save_grayscale: unsupported format '" + ext + "'");
}

void save_raw(const Image& img, const std::filesystem::path& path) {
  static_assert(std::endian::native == std::endian::little, "raw dumps assume little-endian hosts");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("save_raw: cannot write " + path.string());
  out << "LPTVF64 " << img.height() << ' ' << img.width() << '\n';
  out.write(reinterpret_cast<const char*>(img.pixels().data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(img.size())));
  if (!out) throw std::runtime_error("save_raw: write failed for " + path.string());
}

Image load_raw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("load_raw: cannot open " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic;
  Index height = 0, width = 0;
  hs >> magic >> height >> width;
  if (magic != "LPTVF64" || height <= 0 || width <= 0) {
    throw std::runtime_error("load_raw: bad header in " + path.string());
  }
  Raster<double> pixels(height, width);
  const auto bytes = static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(pixels.size()));
  in.read(reinterpret_cast<char*>(pixels.data()), bytes);
  if (in.gcount() != bytes) throw std::runtime_error("load_raw: truncated " + path.string());
  return Image(std::move(pixels));
}

}  // namespace lptv
