#pragma once

#include "colorgs/common.hpp"

#include <filesystem>

namespace colorgs {

/// 8-bit RGB PNG or binary PPM (P6), chosen by extension. Values are
/// clamped to [0, 1] and rounded to the nearest 1/255.
void write_color(const std::filesystem::path& path, const Image& rgb);
Image read_color(const std::filesystem::path& path);

/// Single-channel little-endian PFM ("Pf", scale -1.0), bottom row first.
void write_pfm(const std::filesystem::path& path, const Image& gray);
Image read_pfm(const std::filesystem::path& path);

/// Binary PGM (P5): 0 -> 0, 255 -> 1. Any nonzero byte reads as 1.
void write_mask(const std::filesystem::path& path, const Image& mask);
Image read_mask(const std::filesystem::path& path);

}  // namespace colorgs
