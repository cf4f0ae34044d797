#include "flickermine/imageproc.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "flickermine/errors.hpp"

namespace flickermine {

GrayImage::GrayImage(int width, int height, std::vector<double> data)
    : width_(width), height_(height), data_(std::move(data)) {
    if (width <= 0 || height <= 0) throw ImageError("image dimensions must be positive");
    if (data_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
        throw ImageError("image data length " + std::to_string(data_.size()) + " does not match " +
                         std::to_string(width) + "x" + std::to_string(height));
    }
    for (double v : data_) {
        if (!(v >= 0.0 && v <= 1.0)) throw ImageError("image intensities must be finite in [0,1]");
    }
}

GrayImage::GrayImage(int width, int height)
    : width_(width), height_(height) {
    if (width <= 0 || height <= 0) throw ImageError("image dimensions must be positive");
    data_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), 0.0);
}

GrayImage GrayImage::from_u8(int width, int height, std::span<const std::uint8_t> levels) {
    GrayImage out(width, height);
    if (levels.size() != out.data_.size()) throw ImageError("gray level buffer has the wrong length");
    std::transform(levels.begin(), levels.end(), out.data_.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v) / 255.0; });
    return out;
}

GrayImage to_gray(const RgbImage& rgb) {
    if (rgb.width <= 0 || rgb.height <= 0) throw ImageError("cannot convert an empty image");
    const std::size_t n = static_cast<std::size_t>(rgb.width) * static_cast<std::size_t>(rgb.height);
    if (rgb.data.size() != n * 3) throw ImageError("RGB buffer has the wrong length");
    std::vector<double> gray(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rgb.data[3 * i];
        const double g = rgb.data[3 * i + 1];
        const double b = rgb.data[3 * i + 2];
        gray[i] = std::clamp((0.299 * r + 0.587 * g + 0.114 * b) / 255.0, 0.0, 1.0);
    }
    return GrayImage(rgb.width, rgb.height, std::move(gray));
}

GrayImage crop(const GrayImage& image, const PixelRect& rect) {
    if (rect.w <= 0 || rect.h <= 0 || rect.x < 0 || rect.y < 0 || rect.right() > image.width() ||
        rect.bottom() > image.height()) {
        throw ImageError("crop rectangle outside image");
    }
    GrayImage out(rect.w, rect.h);
    for (int y = 0; y < rect.h; ++y) {
        const double* src = image.row(rect.y + y) + rect.x;
        std::copy(src, src + rect.w, &out.at(0, y));
    }
    return out;
}

double ncc(const GrayImage& templ, const GrayImage& window) {
    if (templ.width() != window.width() || templ.height() != window.height()) {
        throw ImageError("ncc requires equally sized patches");
    }
    if (templ.empty()) throw ImageError("ncc of empty patches");
    const auto t = templ.pixels();
    const auto w = window.pixels();
    const double n = static_cast<double>(t.size());
    double t_sum = 0.0;
    double w_sum = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        t_sum += t[i];
        w_sum += w[i];
    }
    const double t_mean = t_sum / n;
    const double w_mean = w_sum / n;
    double cross = 0.0;
    double t_var = 0.0;
    double w_var = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double dt = t[i] - t_mean;
        const double dw = w[i] - w_mean;
        cross += dt * dw;
        t_var += dt * dt;
        w_var += dw * dw;
    }
    if (t_var / n <= kMinPatchVariance || w_var / n <= kMinPatchVariance) {
        throw ZeroVarianceError("zero-variance patch");
    }
    return std::clamp(cross / std::sqrt(t_var * w_var), -1.0, 1.0);
}

namespace {

// Summed-area tables of (v - shift) and (v - shift)^2; the shift keeps the sums small so
// the window variance sumsq - sum^2/n does not cancel catastrophically.
struct IntegralTables {
    int stride = 0;
    std::vector<double> sum;
    std::vector<double> sumsq;

    explicit IntegralTables(const GrayImage& img) : stride(img.width() + 1) {
        double shift = 0.0;
        for (double v : img.pixels()) shift += v;
        shift /= static_cast<double>(img.size());
        const std::size_t cells = static_cast<std::size_t>(stride) * (img.height() + 1);
        sum.assign(cells, 0.0);
        sumsq.assign(cells, 0.0);
        for (int y = 0; y < img.height(); ++y) {
            double row_sum = 0.0;
            double row_sq = 0.0;
            const double* src = img.row(y);
            for (int x = 0; x < img.width(); ++x) {
                const double v = src[x] - shift;
                row_sum += v;
                row_sq += v * v;
                const std::size_t idx = static_cast<std::size_t>(y + 1) * stride + (x + 1);
                sum[idx] = sum[idx - stride] + row_sum;
                sumsq[idx] = sumsq[idx - stride] + row_sq;
            }
        }
    }

    double rect(const std::vector<double>& table, int x, int y, int w, int h) const noexcept {
        const std::size_t s = static_cast<std::size_t>(stride);
        return table[(y + h) * s + (x + w)] - table[y * s + (x + w)] - table[(y + h) * s + x] + table[y * s + x];
    }
};

}  // namespace

MatchResult match_template(const GrayImage& templ, const GrayImage& region) {
    if (templ.empty() || region.empty()) throw ImageError("match_template on empty image");
    if (templ.width() > region.width() || templ.height() > region.height()) {
        throw ImageError("template larger than search region");
    }
    const int tw = templ.width();
    const int th = templ.height();
    const double n = static_cast<double>(templ.size());

    double t_mean = 0.0;
    for (double v : templ.pixels()) t_mean += v;
    t_mean /= n;
    std::vector<double> t_dev(templ.size());
    double t_var = 0.0;
    for (std::size_t i = 0; i < t_dev.size(); ++i) {
        t_dev[i] = templ.pixels()[i] - t_mean;
        t_var += t_dev[i] * t_dev[i];
    }
    if (t_var / n <= kMinPatchVariance) throw ZeroVarianceError("zero-variance template");

    const IntegralTables tables(region);
    MatchResult best;
    bool found = false;
    for (int oy = 0; oy + th <= region.height(); ++oy) {
        for (int ox = 0; ox + tw <= region.width(); ++ox) {
            const double s = tables.rect(tables.sum, ox, oy, tw, th);
            const double w_var = tables.rect(tables.sumsq, ox, oy, tw, th) - s * s / n;
            if (w_var / n <= kMinPatchVariance) continue;
            // sum(t_dev) == 0, so correlating against raw window values equals the zero-mean form.
            double cross = 0.0;
            for (int y = 0; y < th; ++y) {
                const double* wrow = region.row(oy + y) + ox;
                const double* trow = t_dev.data() + static_cast<std::size_t>(y) * tw;
                for (int x = 0; x < tw; ++x) cross += trow[x] * wrow[x];
            }
            const double score = std::clamp(cross / std::sqrt(t_var * w_var), -1.0, 1.0);
            if (!found || score > best.ncc) {
                best = {ox, oy, score};
                found = true;
            }
        }
    }
    if (!found) throw ZeroVarianceError("every candidate window is flat");
    return best;
}

}  // namespace flickermine
