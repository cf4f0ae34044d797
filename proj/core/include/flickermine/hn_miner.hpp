#pragma once

#include <compare>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "flickermine/frame_store.hpp"
#include "flickermine/imageproc.hpp"
#include "flickermine/ingest.hpp"
#include "flickermine/model.hpp"

namespace flickermine {

/// Template-matches the detection patch of `source_frame` inside the enlarged detection
/// region of `target_frame`.
///
/// The predicted box keeps the detection's size and moves by the displacement of the best
/// match. When the best NCC is below cfg.ncc_threshold, or a patch is flat, the result is
/// MatchRejected without a prediction. Otherwise the status is Isolated with max_iou = 0
/// until assess_against_detections compares the prediction with the target frame's boxes.
AdjacentEvidence predict_in_adjacent(const DetectionRecord& det, std::int64_t target_index,
                                     const GrayImage& target_frame, const GrayImage& source_frame,
                                     const MiningConfig& cfg);

/// Fills max_iou (0 with no detections) and sets Consistent when it reaches
/// cfg.iou_isolation_threshold. Evidence without a prediction is left unchanged.
void assess_against_detections(AdjacentEvidence& evidence, std::span<const DetectionRecord> frame_detections,
                               const MiningConfig& cfg);

/// The rule table. Consistency is re-derived from each evidence entry's max_iou and
/// cfg.iou_isolation_threshold, so a fixed evidence list can be re-decided under other
/// thresholds.
///   - any Consistent frame              -> PseudoPositive
///   - else >= cfg.min_valid_frames_per_side Isolated frames before AND after -> HardNegative
///   - otherwise                          -> Unverified
LabelKind decide_label(std::span<const AdjacentEvidence> evidence, std::int64_t frame_index,
                       const MiningConfig& cfg);

/// Examines frames f-k and f+k for k = 1..cfg.temporal_window, in that interleaved order,
/// and labels the detection. `video` must already be thresholded at cfg.score_threshold.
MiningLabel classify_detection(const DetectionRecord& det, const VideoDetections& video,
                               const FrameSource& frames, const MiningConfig& cfg);

/// Labels every detection of a thresholded video. Output is in canonical order
/// (frame, box x, y, ...) and independent of `workers`.
std::vector<LabeledDetection> mine_video(const VideoDetections& video, const FrameSource& frames,
                                         const MiningConfig& cfg, unsigned workers = 1);

/// mine_video over every video of a thresholded stream, concatenated in video order.
std::vector<LabeledDetection> mine_stream(const DetectionStream& stream, const FrameSource& frames,
                                          const MiningConfig& cfg, unsigned workers = 1);

struct FrameKey {
    std::string video_id;
    std::int64_t frame_index = 0;

    friend auto operator<=>(const FrameKey&, const FrameKey&) = default;
    friend bool operator==(const FrameKey&, const FrameKey&) = default;
};

/// Frames holding at least one PseudoPositive and at least one HardNegative.
std::set<FrameKey> select_hn_frames(std::span<const LabeledDetection> labels);

}  // namespace flickermine
