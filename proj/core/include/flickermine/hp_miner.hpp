#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "flickermine/frame_store.hpp"
#include "flickermine/ingest.hpp"
#include "flickermine/model.hpp"

namespace flickermine {

/// Chain of detections of one object. Consecutive members are 1 or 2 frames apart; every
/// 2-frame step leaves its middle frame in gap_frames.
struct Tracklet {
    std::int64_t id = 0;
    std::string video_id;
    std::vector<DetectionRecord> members;
    std::vector<std::int64_t> gap_frames;

    friend bool operator==(const Tracklet&, const Tracklet&) = default;
};

/// Greedy IoU linking over a thresholded video.
///
/// Frames are visited in ascending order. Detections of frame f are first offered to tracks
/// whose last member is in f-1, then the leftovers to tracks whose last member is in f-2
/// (recording f-1 as a gap). Within each round, candidate (track, detection) pairs with
/// IoU >= cfg.hp_link_iou are accepted by descending IoU, ties by track age then detection
/// order, each side used at most once. Unmatched detections open new tracks. Tracks shorter
/// than cfg.hp_min_tracklet_len are dropped; survivors are numbered from 1 in creation order.
std::vector<Tracklet> build_tracklets(const VideoDetections& video, const MiningConfig& cfg);

/// Checks every gap of `tracklet`: the candidate box is the midpoint of the flanking boxes; it is
/// accepted when no detection of the gap frame overlaps it with IoU >= cfg.iou_isolation_threshold
/// and the flank-before detection patch correlates with the same-sized patch centred on the
/// candidate at NCC >= cfg.hp_ncc_confirm.
std::vector<HardPositive> find_off_flickers(const Tracklet& tracklet, const VideoDetections& video,
                                            const FrameSource& frames, const MiningConfig& cfg);

struct HardPositiveResult {
    std::vector<Tracklet> tracklets;
    std::vector<HardPositive> hard_positives;  ///< ordered by (frame, tracklet id)
};

/// build_tracklets + find_off_flickers over one video; gaps are confirmed on `workers` threads.
HardPositiveResult mine_hard_positives(const VideoDetections& video, const FrameSource& frames,
                                       const MiningConfig& cfg, unsigned workers = 1);

/// Per-video results concatenated in video order.
HardPositiveResult mine_hard_positives(const DetectionStream& stream, const FrameSource& frames,
                                       const MiningConfig& cfg, unsigned workers = 1);

}  // namespace flickermine
