#pragma once

#include <cstdint>
#include <filesystem>
#include <span>

#include "flickermine/imageproc.hpp"

namespace flickermine {

/// Decodes a PNG/JPEG file into RGB. Gray files are expanded to three equal channels.
/// Throws FrameAccessError when the file is missing or cannot be decoded.
RgbImage load_rgb(const std::filesystem::path& path);

/// Decodes a PNG/JPEG file to intensities in [0,1]. Single-channel 8-bit files map v/255
/// directly; color files go through to_gray.
GrayImage load_gray(const std::filesystem::path& path);

/// Writes an 8-bit single-channel PNG.
void write_gray_png(const std::filesystem::path& path, int width, int height,
                    std::span<const std::uint8_t> levels);

/// Writes an 8-bit RGB PNG.
void write_rgb_png(const std::filesystem::path& path, const RgbImage& image);

}  // namespace flickermine
