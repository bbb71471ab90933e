#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "lptv/core.hpp"

namespace lptv {

/// Loads an 8-bit grayscale PNG or binary PGM (P5, maxval 255), chosen by extension.
/// Also accepts the `.f64` raw format written by save_raw. Color input is rejected.
Image load_grayscale(const std::filesystem::path& path);

/// Writes an 8-bit PNG or PGM: clamp to [0, 255], round half away from zero.
void save_grayscale(const Image& img, const std::filesystem::path& path);

/// Unquantized dump: ASCII header "LPTVF64 <height> <width>\n" followed by
/// height*width little-endian IEEE-754 doubles in row-major order.
void save_raw(const Image& img, const std::filesystem::path& path);
Image load_raw(const std::filesystem::path& path);

/// The byte a pixel value is stored as.
std::uint8_t quantize_pixel(double value);

}  // namespace lptv
