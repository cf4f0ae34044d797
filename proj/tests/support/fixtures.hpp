#pragma once

#include <cstdint>
#include <filesystem>
#include <unistd.h>
#include <random>
#include <string>
#include <vector>

#include "flickermine/imageproc.hpp"
#include "flickermine/model.hpp"

namespace fixtures {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "fm") {
        static int counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("flickermine-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

/// Uniform noise in [0.1, 0.9].
inline flickermine::GrayImage noise_image(int w, int h, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<double> data(static_cast<std::size_t>(w) * h);
    for (auto& v : data) v = 0.1 + 0.8 * static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return flickermine::GrayImage(w, h, std::move(data));
}

inline flickermine::GrayImage flat_image(int w, int h, double v) {
    return flickermine::GrayImage(w, h, std::vector<double>(static_cast<std::size_t>(w) * h, v));
}

/// Copies `patch` into `image` with its top-left corner at (x, y).
inline void paste(flickermine::GrayImage& image, const flickermine::GrayImage& patch, int x, int y) {
    for (int py = 0; py < patch.height(); ++py)
        for (int px = 0; px < patch.width(); ++px) image.at(x + px, y + py) = patch.at(px, py);
}

inline flickermine::DetectionRecord det(const std::string& video, std::int64_t frame, double x, double y, double w,
                                        double h, double score = 0.9, const std::string& category = "face") {
    return {video, frame, {x, y, w, h}, score, category};
}

}  // namespace fixtures

#include <cstdlib>
#include <fstream>
#include <sstream>

namespace fixtures {

inline std::string read_text(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Golden file contents; with FLICKERMINE_UPDATE_GOLDEN set the file is rewritten from `actual` first.
inline std::string golden(const std::string& relative, const std::string& actual) {
    const auto path = std::filesystem::path(FLICKERMINE_GOLDEN_DIR) / relative;
    if (std::getenv("FLICKERMINE_UPDATE_GOLDEN")) {
        std::filesystem::create_directories(path.parent_path());
        std::ofstream(path, std::ios::binary) << actual;
    }
    return read_text(path);
}

}  // namespace fixtures
