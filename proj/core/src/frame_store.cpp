#include "flickermine/frame_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <regex>

#include "flickermine/errors.hpp"
#include "flickermine/image_io.hpp"

namespace flickermine {

std::string frame_file_name(std::int64_t index, std::string_view ext) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%08lld.", static_cast<long long>(index));
    return std::string(buf) + std::string(ext);
}

DirectoryFrameStore::DirectoryFrameStore(std::filesystem::path root, std::size_t cache_capacity)
    : root_(std::move(root)), capacity_(std::max<std::size_t>(1, cache_capacity)) {
    std::error_code ec;
    if (!std::filesystem::is_directory(root_, ec)) {
        throw FrameAccessError("frames directory not found: " + root_.string());
    }
    static const std::regex kFramePattern(R"((\d{8})\.(png|jpg|jpeg|PNG|JPG|JPEG))");
    for (const auto& entry : std::filesystem::directory_iterator(root_)) {
        if (!entry.is_directory()) continue;
        VideoFiles files;
        for (const auto& f : std::filesystem::directory_iterator(entry.path())) {
            if (!f.is_regular_file()) continue;
            const std::string name = f.path().filename().string();
            std::smatch m;
            if (!std::regex_match(name, m, kFramePattern)) continue;
            const auto index = static_cast<std::size_t>(std::stoll(m[1].str()));
            if (files.names.size() <= index) files.names.resize(index + 1);
            // Prefer the lexicographically smallest name when both .png and .jpg exist.
            if (files.names[index].empty() || name < files.names[index]) files.names[index] = name;
        }
        videos_.emplace(entry.path().filename().string(), std::move(files));
    }
}

std::vector<std::string> DirectoryFrameStore::videos() const {
    std::vector<std::string> out;
    for (const auto& [id, files] : videos_) out.push_back(id);
    return out;
}

const DirectoryFrameStore::VideoFiles& DirectoryFrameStore::video_files(std::string_view video) const {
    auto it = videos_.find(video);
    if (it == videos_.end()) {
        throw FrameAccessError("no frames for video '" + std::string(video) + "' under " + root_.string());
    }
    return it->second;
}

std::int64_t DirectoryFrameStore::frame_count(std::string_view video) const {
    return static_cast<std::int64_t>(video_files(video).names.size());
}

const std::string& DirectoryFrameStore::file_name(std::string_view video, std::int64_t index) const {
    const VideoFiles& files = video_files(video);
    if (index < 0 || index >= static_cast<std::int64_t>(files.names.size())) {
        throw FrameAccessError("frame index " + std::to_string(index) + " out of range for video '" +
                               std::string(video) + "' (" + std::to_string(files.names.size()) + " frames)");
    }
    const std::string& name = files.names[static_cast<std::size_t>(index)];
    if (name.empty()) {
        throw FrameAccessError("missing frame file: " +
                               (root_ / std::string(video) / frame_file_name(index)).string());
    }
    return name;
}

void DirectoryFrameStore::check_dims(const VideoFiles& files, std::string_view video, int w, int h) const {
    // Called with mutex_ held.
    if (files.width == 0) {
        files.width = w;
        files.height = h;
    } else if (files.width != w || files.height != h) {
        throw FrameAccessError("frame size mismatch within video '" + std::string(video) + "'");
    }
}

std::shared_ptr<const GrayImage> DirectoryFrameStore::get(std::string_view video, std::int64_t index) const {
    const std::string& name = file_name(video, index);
    CacheKey key{std::string(video), index};
    {
        std::lock_guard lock(mutex_);
        if (auto it = index_.find(key); it != index_.end()) {
            lru_.splice(lru_.begin(), lru_, it->second);
            return it->second->second;
        }
    }
    auto image = std::make_shared<const GrayImage>(load_gray(root_ / std::string(video) / name));
    std::lock_guard lock(mutex_);
    check_dims(video_files(video), video, image->width(), image->height());
    if (auto it = index_.find(key); it != index_.end()) return it->second->second;
    lru_.emplace_front(key, image);
    index_.emplace(std::move(key), lru_.begin());
    while (lru_.size() > capacity_) {
        index_.erase(lru_.back().first);
        lru_.pop_back();
    }
    return image;
}

RgbImage DirectoryFrameStore::color(std::string_view video, std::int64_t index) const {
    return load_rgb(root_ / std::string(video) / file_name(video, index));
}

FrameInfo DirectoryFrameStore::info(std::string_view video, std::int64_t index) const {
    const auto frame = get(video, index);
    return {std::string(video) + "/" + file_name(video, index), frame->width(), frame->height()};
}

void MemoryFrameStore::add_video(std::string video, std::vector<GrayImage> frames) {
    std::vector<std::shared_ptr<const GrayImage>> stored;
    stored.reserve(frames.size());
    for (auto& f : frames) {
        if (!stored.empty() && (f.width() != stored.front()->width() || f.height() != stored.front()->height())) {
            throw ImageError("frames of video '" + video + "' differ in size");
        }
        stored.push_back(std::make_shared<const GrayImage>(std::move(f)));
    }
    videos_[std::move(video)] = std::move(stored);
}

const std::vector<std::shared_ptr<const GrayImage>>& MemoryFrameStore::frames(std::string_view video) const {
    auto it = videos_.find(video);
    if (it == videos_.end()) throw FrameAccessError("no frames for video '" + std::string(video) + "'");
    return it->second;
}

std::int64_t MemoryFrameStore::frame_count(std::string_view video) const {
    return static_cast<std::int64_t>(frames(video).size());
}

std::shared_ptr<const GrayImage> MemoryFrameStore::get(std::string_view video, std::int64_t index) const {
    const auto& f = frames(video);
    if (index < 0 || index >= static_cast<std::int64_t>(f.size())) {
        throw FrameAccessError("frame index " + std::to_string(index) + " out of range for video '" +
                               std::string(video) + "'");
    }
    return f[static_cast<std::size_t>(index)];
}

RgbImage MemoryFrameStore::color(std::string_view video, std::int64_t index) const {
    const auto frame = get(video, index);
    RgbImage out{frame->width(), frame->height(), {}};
    out.data.reserve(frame->size() * 3);
    for (double v : frame->pixels()) {
        const auto level = static_cast<std::uint8_t>(std::lround(v * 255.0));
        out.data.insert(out.data.end(), {level, level, level});
    }
    return out;
}

FrameInfo MemoryFrameStore::info(std::string_view video, std::int64_t index) const {
    const auto frame = get(video, index);
    return {std::string(video) + "/" + frame_file_name(index), frame->width(), frame->height()};
}

}  // namespace flickermine
