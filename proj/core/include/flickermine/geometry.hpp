#pragma once

#include <optional>

#include "flickermine/model.hpp"

namespace flickermine {

/// Intersection-over-union with continuous coordinates (no +1 pixel convention).
/// Symmetric, in [0,1], 0 for disjoint or edge-touching boxes.
double iou(const BoundingBox& a, const BoundingBox& b) noexcept;

/// Moves every edge outward by `margin` and intersects the result with [0,frame_w]x[0,frame_h].
BoundingBox enlarge_clamped(const BoundingBox& box, double margin, double frame_w, double frame_h);

/// Component-wise linear interpolation of (x, y, w, h). Throws InvalidInput for t outside [0,1].
BoundingBox interpolate(const BoundingBox& a, const BoundingBox& b, double t);

/// Integer pixel rectangle [x, x+w) x [y, y+h).
struct PixelRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    int right() const noexcept { return x + w; }
    int bottom() const noexcept { return y + h; }

    friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Snaps a continuous box to the pixel grid: each edge is rounded to the nearest integer
/// (halves away from zero) and clamped to the frame. Empty results yield nullopt.
std::optional<PixelRect> to_pixel_rect(const BoundingBox& box, int frame_w, int frame_h) noexcept;

/// The box with the given pixel rect's extent.
BoundingBox to_box(const PixelRect& rect) noexcept;

}  // namespace flickermine
