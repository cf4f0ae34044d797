#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "flickermine/model.hpp"

namespace flickermine {

/// Optional provenance carried by a `{"meta": {...}}` line in a detection stream.
struct StreamMetadata {
    std::string detector;
    std::string category;
    std::string created;

    bool empty() const noexcept { return detector.empty() && category.empty() && created.empty(); }
    friend bool operator==(const StreamMetadata&, const StreamMetadata&) = default;
};

/// All detections of one frame, in canonical order.
struct FrameGroup {
    std::int64_t frame_index = 0;
    std::vector<DetectionRecord> records;

    friend bool operator==(const FrameGroup&, const FrameGroup&) = default;
};

/// Frame groups of one video, ascending by frame_index, no empty groups.
struct VideoDetections {
    std::string video_id;
    std::vector<FrameGroup> frames;

    /// Group for `frame_index`, or nullptr when the frame has no detections.
    const FrameGroup* find(std::int64_t frame_index) const noexcept;
    std::size_t detection_count() const noexcept;

    friend bool operator==(const VideoDetections&, const VideoDetections&) = default;
};

/// Detections grouped by video (ascending id) and frame.
struct DetectionStream {
    StreamMetadata metadata;
    std::vector<VideoDetections> videos;

    /// Groups and sorts arbitrary records.
    static DetectionStream from_records(std::vector<DetectionRecord> records, StreamMetadata metadata = {});

    const VideoDetections* find(std::string_view video_id) const noexcept;
    std::size_t detection_count() const noexcept;
    /// Every record, video by video in canonical order.
    std::vector<DetectionRecord> records() const;

    friend bool operator==(const DetectionStream&, const DetectionStream&) = default;
};

/// Parses line-delimited JSON detection records:
///   {"video":"v1","frame":12,"bbox":[x,y,w,h],"score":0.93,"category":"face"}
/// Blank lines are skipped and unknown fields ignored. A line holding a "meta" object sets the
/// stream metadata. Throws ParseError (with the 1-based line number) on malformed lines,
/// invalid boxes and scores outside [0,1].
DetectionStream parse_detection_stream(std::istream& input);
DetectionStream parse_detection_stream(std::string_view text);

/// Writes the stream back in the same line format (metadata line first when present).
void write_detection_stream(std::ostream& out, const DetectionStream& stream);

/// Keeps records with score >= threshold. Empty groups and videos are dropped.
DetectionStream filter_by_score(const DetectionStream& stream, double threshold);

/// Keeps records of one category.
DetectionStream filter_by_category(const DetectionStream& stream, std::string_view category);

}  // namespace flickermine
