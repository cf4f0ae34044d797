#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "flickermine/imageproc.hpp"

namespace flickermine {

/// Where a frame lives and how large it is.
struct FrameInfo {
    std::string relative_path;  ///< "<video>/<%08d>.<ext>"
    int width = 0;
    int height = 0;
};

/// Read-only random access to the frames of one or more videos. Implementations are safe
/// for concurrent readers.
class FrameSource {
public:
    virtual ~FrameSource() = default;

    /// Throws FrameAccessError for an unknown video.
    virtual std::int64_t frame_count(std::string_view video) const = 0;

    /// Frame `index` as intensities in [0,1]. Throws FrameAccessError when the index is out of
    /// range, the file is missing or cannot be decoded, or its size differs from the video's.
    virtual std::shared_ptr<const GrayImage> get(std::string_view video, std::int64_t index) const = 0;

    /// Color pixels for crops meant for human inspection.
    virtual RgbImage color(std::string_view video, std::int64_t index) const = 0;

    virtual FrameInfo info(std::string_view video, std::int64_t index) const = 0;
};

/// "<index zero-padded to 8 digits>.png"
std::string frame_file_name(std::int64_t index, std::string_view ext = "png");

/// Frames extracted to `<root>/<video_id>/<%08d>.png|jpg`. The directory is scanned once at
/// construction; decoded frames are kept in a small LRU cache.
class DirectoryFrameStore final : public FrameSource {
public:
    /// Throws FrameAccessError naming the path when `root` is not a directory.
    explicit DirectoryFrameStore(std::filesystem::path root, std::size_t cache_capacity = 64);

    const std::filesystem::path& root() const noexcept { return root_; }
    std::vector<std::string> videos() const;

    std::int64_t frame_count(std::string_view video) const override;
    std::shared_ptr<const GrayImage> get(std::string_view video, std::int64_t index) const override;
    RgbImage color(std::string_view video, std::int64_t index) const override;
    FrameInfo info(std::string_view video, std::int64_t index) const override;

private:
    struct VideoFiles {
        std::vector<std::string> names;  ///< by index; empty string marks a missing file
        mutable int width = 0;
        mutable int height = 0;
    };

    const VideoFiles& video_files(std::string_view video) const;
    const std::string& file_name(std::string_view video, std::int64_t index) const;
    void check_dims(const VideoFiles& files, std::string_view video, int w, int h) const;

    std::filesystem::path root_;
    std::map<std::string, VideoFiles, std::less<>> videos_;

    using CacheKey = std::pair<std::string, std::int64_t>;
    struct CacheKeyHash {
        std::size_t operator()(const CacheKey& k) const noexcept {
            return std::hash<std::string>{}(k.first) ^ (std::hash<std::int64_t>{}(k.second) * 0x9e3779b97f4a7c15ULL);
        }
    };
    std::size_t capacity_;
    mutable std::mutex mutex_;
    mutable std::list<std::pair<CacheKey, std::shared_ptr<const GrayImage>>> lru_;
    mutable std::unordered_map<CacheKey, decltype(lru_)::iterator, CacheKeyHash> index_;
};

/// In-memory frames, used by the synthetic generator and tests.
class MemoryFrameStore final : public FrameSource {
public:
    /// Throws ImageError if the frames of a video differ in size.
    void add_video(std::string video, std::vector<GrayImage> frames);

    std::int64_t frame_count(std::string_view video) const override;
    std::shared_ptr<const GrayImage> get(std::string_view video, std::int64_t index) const override;
    RgbImage color(std::string_view video, std::int64_t index) const override;
    FrameInfo info(std::string_view video, std::int64_t index) const override;

private:
    const std::vector<std::shared_ptr<const GrayImage>>& frames(std::string_view video) const;

    std::map<std::string, std::vector<std::shared_ptr<const GrayImage>>, std::less<>> videos_;
};

}  // namespace flickermine
