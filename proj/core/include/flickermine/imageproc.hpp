#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "flickermine/geometry.hpp"

namespace flickermine {

/// 8-bit interleaved RGB frame.
struct RgbImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> data;  ///< width * height * 3 bytes, row-major, R G B.
};

/// Row-major single-channel image with intensities in [0,1].
class GrayImage {
public:
    GrayImage() = default;

    /// Throws ImageError unless dimensions are positive, data.size() == width * height and
    /// every value is finite in [0,1].
    GrayImage(int width, int height, std::vector<double> data);

    /// Zero-filled image.
    GrayImage(int width, int height);

    /// 8-bit gray levels mapped as v / 255.
    static GrayImage from_u8(int width, int height, std::span<const std::uint8_t> levels);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    bool empty() const noexcept { return data_.empty(); }
    std::size_t size() const noexcept { return data_.size(); }

    double at(int x, int y) const noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    double& at(int x, int y) noexcept { return data_[static_cast<std::size_t>(y) * width_ + x]; }
    const double* row(int y) const noexcept { return data_.data() + static_cast<std::size_t>(y) * width_; }
    std::span<const double> pixels() const noexcept { return data_; }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Best template position inside a search region.
struct MatchResult {
    int offset_x = 0;
    int offset_y = 0;
    double ncc = 0.0;

    friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Per-pixel intensity variance at or below which a patch counts as flat.
inline constexpr double kMinPatchVariance = 1e-10;

/// Luma 0.299 R + 0.587 G + 0.114 B scaled to [0,1]. Throws ImageError on an empty image.
GrayImage to_gray(const RgbImage& rgb);

/// Copy of `rect`, which must lie inside the image.
GrayImage crop(const GrayImage& image, const PixelRect& rect);

/// Zero-mean normalized cross correlation of two equally sized patches, in [-1,1].
/// Throws ImageError on a size mismatch and ZeroVarianceError when either patch is flat.
double ncc(const GrayImage& templ, const GrayImage& window);

/// Exhaustive scan over every integer placement of `templ` inside `region`; returns the
/// placement with the highest NCC, ties going to the smallest offset_y, then offset_x.
/// Flat windows are skipped. Throws ImageError when the template does not fit and
/// ZeroVarianceError when the template, or every candidate window, is flat.
MatchResult match_template(const GrayImage& templ, const GrayImage& region);

}  // namespace flickermine
