#include "flickermine/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "flickermine/errors.hpp"

namespace flickermine {

double iou(const BoundingBox& a, const BoundingBox& b) noexcept {
    const double ix = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double iy = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (ix <= 0.0 || iy <= 0.0) return 0.0;
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    if (uni <= 0.0) return 0.0;
    return std::clamp(inter / uni, 0.0, 1.0);
}

BoundingBox enlarge_clamped(const BoundingBox& box, double margin, double frame_w, double frame_h) {
    const double x0 = std::max(0.0, box.x - margin);
    const double y0 = std::max(0.0, box.y - margin);
    const double x1 = std::min(frame_w, box.right() + margin);
    const double y1 = std::min(frame_h, box.bottom() + margin);
    return {x0, y0, x1 - x0, y1 - y0};
}

BoundingBox interpolate(const BoundingBox& a, const BoundingBox& b, double t) {
    if (!(t >= 0.0 && t <= 1.0)) throw InvalidInput("interpolation parameter must be in [0,1]");
    // Exact endpoints: a + (b - a) * 1 can differ from b in the last ulp.
    if (t == 0.0) return a;
    if (t == 1.0) return b;
    auto lerp = [t](double p, double q) { return p + (q - p) * t; };
    return {lerp(a.x, b.x), lerp(a.y, b.y), lerp(a.w, b.w), lerp(a.h, b.h)};
}

std::optional<PixelRect> to_pixel_rect(const BoundingBox& box, int frame_w, int frame_h) noexcept {
    auto snap = [](double v, int hi) {
        return static_cast<int>(std::clamp<long>(std::lround(v), 0L, static_cast<long>(hi)));
    };
    const int x0 = snap(box.x, frame_w);
    const int y0 = snap(box.y, frame_h);
    const int x1 = snap(box.right(), frame_w);
    const int y1 = snap(box.bottom(), frame_h);
    if (x1 <= x0 || y1 <= y0) return std::nullopt;
    return PixelRect{x0, y0, x1 - x0, y1 - y0};
}

BoundingBox to_box(const PixelRect& rect) noexcept {
    return {static_cast<double>(rect.x), static_cast<double>(rect.y), static_cast<double>(rect.w),
            static_cast<double>(rect.h)};
}

}  // namespace flickermine
