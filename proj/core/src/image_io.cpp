#include "flickermine/image_io.hpp"

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "flickermine/errors.hpp"

namespace flickermine {

namespace {

cv::Mat decode(const std::filesystem::path& path) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(path, ec)) {
        throw FrameAccessError("missing frame file: " + path.string());
    }
    cv::Mat mat = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (mat.empty()) throw FrameAccessError("cannot decode image: " + path.string());
    if (mat.depth() != CV_8U) throw FrameAccessError("unsupported bit depth (8-bit only): " + path.string());
    if (mat.channels() != 1 && mat.channels() != 3 && mat.channels() != 4) {
        throw FrameAccessError("unsupported channel count: " + path.string());
    }
    return mat;
}

RgbImage to_rgb(const cv::Mat& mat) {
    RgbImage out;
    out.width = mat.cols;
    out.height = mat.rows;
    out.data.resize(static_cast<std::size_t>(mat.cols) * mat.rows * 3);
    const int ch = mat.channels();
    std::size_t k = 0;
    for (int y = 0; y < mat.rows; ++y) {
        const std::uint8_t* src = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < mat.cols; ++x, k += 3) {
            if (ch == 1) {
                out.data[k] = out.data[k + 1] = out.data[k + 2] = src[x];
            } else {
                // OpenCV stores BGR(A).
                out.data[k] = src[x * ch + 2];
                out.data[k + 1] = src[x * ch + 1];
                out.data[k + 2] = src[x * ch];
            }
        }
    }
    return out;
}

void write_mat(const std::filesystem::path& path, const cv::Mat& mat) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    const std::vector<int> params{cv::IMWRITE_PNG_COMPRESSION, 6};
    bool ok = false;
    try {
        ok = cv::imwrite(path.string(), mat, params);
    } catch (const cv::Exception& e) {
        throw Error("cannot write image " + path.string() + ": " + e.what());
    }
    if (!ok) throw Error("cannot write image " + path.string());
}

}  // namespace

RgbImage load_rgb(const std::filesystem::path& path) { return to_rgb(decode(path)); }

GrayImage load_gray(const std::filesystem::path& path) {
    const cv::Mat mat = decode(path);
    if (mat.channels() == 1) {
        std::vector<std::uint8_t> levels(static_cast<std::size_t>(mat.cols) * mat.rows);
        for (int y = 0; y < mat.rows; ++y) {
            const std::uint8_t* src = mat.ptr<std::uint8_t>(y);
            std::copy(src, src + mat.cols, levels.begin() + static_cast<std::ptrdiff_t>(y) * mat.cols);
        }
        return GrayImage::from_u8(mat.cols, mat.rows, levels);
    }
    return to_gray(to_rgb(mat));
}

void write_gray_png(const std::filesystem::path& path, int width, int height,
                    std::span<const std::uint8_t> levels) {
    if (width <= 0 || height <= 0 || levels.size() != static_cast<std::size_t>(width) * height) {
        throw ImageError("gray PNG buffer does not match its dimensions");
    }
    cv::Mat mat(height, width, CV_8UC1);
    for (int y = 0; y < height; ++y) {
        std::copy_n(levels.begin() + static_cast<std::ptrdiff_t>(y) * width, width, mat.ptr<std::uint8_t>(y));
    }
    write_mat(path, mat);
}

void write_rgb_png(const std::filesystem::path& path, const RgbImage& image) {
    if (image.width <= 0 || image.height <= 0 ||
        image.data.size() != static_cast<std::size_t>(image.width) * image.height * 3) {
        throw ImageError("RGB PNG buffer does not match its dimensions");
    }
    cv::Mat mat(image.height, image.width, CV_8UC3);
    std::size_t k = 0;
    for (int y = 0; y < image.height; ++y) {
        std::uint8_t* dst = mat.ptr<std::uint8_t>(y);
        for (int x = 0; x < image.width; ++x, k += 3) {
            dst[3 * x] = image.data[k + 2];
            dst[3 * x + 1] = image.data[k + 1];
            dst[3 * x + 2] = image.data[k];
        }
    }
    write_mat(path, mat);
}

}  // namespace flickermine
