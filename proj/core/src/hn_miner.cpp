#include "flickermine/hn_miner.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "flickermine/errors.hpp"
#include "flickermine/geometry.hpp"

namespace flickermine {

AdjacentEvidence predict_in_adjacent(const DetectionRecord& det, std::int64_t target_index,
                                     const GrayImage& target_frame, const GrayImage& source_frame,
                                     const MiningConfig& cfg) {
    if (target_frame.width() != source_frame.width() || target_frame.height() != source_frame.height()) {
        throw ImageError("adjacent frames differ in size");
    }
    const int fw = source_frame.width();
    const int fh = source_frame.height();
    const auto templ_rect = to_pixel_rect(det.box, fw, fh);
    if (!templ_rect) {
        throw InvalidInput("detection box outside frame in video '" + det.video_id + "' frame " +
                           std::to_string(det.frame_index));
    }
    const BoundingBox region_box = enlarge_clamped(det.box, cfg.enlargement_px, fw, fh);
    // Rounding is monotone, so the region rect always contains the template rect.
    const auto region_rect = to_pixel_rect(region_box, fw, fh);

    AdjacentEvidence ev;
    ev.frame_index = target_index;
    ev.status = EvidenceStatus::MatchRejected;

    MatchResult match;
    try {
        match = match_template(crop(source_frame, *templ_rect), crop(target_frame, *region_rect));
    } catch (const ZeroVarianceError&) {
        return ev;
    }
    ev.ncc = match.ncc;
    if (match.ncc < cfg.ncc_threshold) return ev;

    const double dx = region_rect->x + match.offset_x - templ_rect->x;
    const double dy = region_rect->y + match.offset_y - templ_rect->y;
    ev.status = EvidenceStatus::Isolated;
    ev.prediction = TrackletPrediction{{det.box.x + dx, det.box.y + dy, det.box.w, det.box.h}, match.ncc};
    ev.max_iou = 0.0;
    return ev;
}

void assess_against_detections(AdjacentEvidence& evidence, std::span<const DetectionRecord> frame_detections,
                               const MiningConfig& cfg) {
    if (!evidence.prediction) return;
    double best = 0.0;
    for (const auto& d : frame_detections) best = std::max(best, iou(evidence.prediction->box, d.box));
    evidence.max_iou = best;
    evidence.status = best >= cfg.iou_isolation_threshold ? EvidenceStatus::Consistent : EvidenceStatus::Isolated;
}

LabelKind decide_label(std::span<const AdjacentEvidence> evidence, std::int64_t frame_index,
                       const MiningConfig& cfg) {
    int valid_before = 0;
    int valid_after = 0;
    for (const auto& ev : evidence) {
        if (!ev.prediction || !ev.max_iou) continue;
        if (*ev.max_iou >= cfg.iou_isolation_threshold) return LabelKind::PseudoPositive;
        (ev.frame_index < frame_index ? valid_before : valid_after) += 1;
    }
    if (valid_before >= cfg.min_valid_frames_per_side && valid_after >= cfg.min_valid_frames_per_side) {
        return LabelKind::HardNegative;
    }
    return LabelKind::Unverified;
}

MiningLabel classify_detection(const DetectionRecord& det, const VideoDetections& video,
                               const FrameSource& frames, const MiningConfig& cfg) {
    if (det.score < cfg.score_threshold) {
        throw InvalidInput("classify_detection requires score >= score_threshold");
    }
    const std::int64_t count = frames.frame_count(video.video_id);
    if (det.frame_index >= count) {
        throw FrameAccessError("detection frame " + std::to_string(det.frame_index) + " beyond the " +
                               std::to_string(count) + " frames of video '" + video.video_id + "'");
    }
    const auto source = frames.get(video.video_id, det.frame_index);

    MiningLabel label;
    label.evidence.reserve(static_cast<std::size_t>(2 * cfg.temporal_window));
    for (int k = 1; k <= cfg.temporal_window; ++k) {
        for (const std::int64_t target : {det.frame_index - k, det.frame_index + k}) {
            if (target < 0 || target >= count) {
                label.evidence.push_back({target, EvidenceStatus::OutOfRange, std::nullopt, std::nullopt, std::nullopt});
                continue;
            }
            AdjacentEvidence ev = predict_in_adjacent(det, target, *frames.get(video.video_id, target), *source, cfg);
            if (const FrameGroup* group = video.find(target)) {
                assess_against_detections(ev, group->records, cfg);
            } else {
                assess_against_detections(ev, {}, cfg);
            }
            label.evidence.push_back(std::move(ev));
        }
    }
    label.kind = decide_label(label.evidence, det.frame_index, cfg);
    return label;
}

std::vector<LabeledDetection> mine_video(const VideoDetections& video, const FrameSource& frames,
                                         const MiningConfig& cfg, unsigned workers) {
    std::vector<const DetectionRecord*> dets;
    for (const auto& g : video.frames)
        for (const auto& r : g.records) dets.push_back(&r);

    std::vector<LabeledDetection> out(dets.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < dets.size(); i = next++) {
            try {
                out[i] = {*dets[i], classify_detection(*dets[i], video, frames, cfg)};
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = dets.size();
            }
        }
    };
    const unsigned n_threads = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::max<std::size_t>(1, dets.size())));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<LabeledDetection> mine_stream(const DetectionStream& stream, const FrameSource& frames,
                                          const MiningConfig& cfg, unsigned workers) {
    std::vector<LabeledDetection> out;
    for (const auto& video : stream.videos) {
        auto labels = mine_video(video, frames, cfg, workers);
        out.insert(out.end(), std::make_move_iterator(labels.begin()), std::make_move_iterator(labels.end()));
    }
    return out;
}

std::set<FrameKey> select_hn_frames(std::span<const LabeledDetection> labels) {
    struct Counts {
        int pseudo_positive = 0;
        int hard_negative = 0;
    };
    std::map<FrameKey, Counts> counts;
    for (const auto& l : labels) {
        auto& c = counts[{l.detection.video_id, l.detection.frame_index}];
        if (l.label.kind == LabelKind::PseudoPositive) ++c.pseudo_positive;
        if (l.label.kind == LabelKind::HardNegative) ++c.hard_negative;
    }
    std::set<FrameKey> out;
    for (const auto& [key, c] : counts) {
        if (c.pseudo_positive > 0 && c.hard_negative > 0) out.insert(key);
    }
    return out;
}

}  // namespace flickermine
