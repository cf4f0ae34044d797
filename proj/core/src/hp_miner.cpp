#include "flickermine/hp_miner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <tuple>

#include "flickermine/errors.hpp"
#include "flickermine/geometry.hpp"
#include "flickermine/imageproc.hpp"

namespace flickermine {

namespace {

struct OpenTrack {
    std::vector<const DetectionRecord*> members;
    std::vector<std::int64_t> gaps;

    std::int64_t last_frame() const { return members.back()->frame_index; }
};

struct LinkCandidate {
    double overlap;
    std::size_t track;
    std::size_t det;
};

void link_round(std::vector<OpenTrack>& tracks, std::int64_t head_frame, const FrameGroup& group,
                std::vector<bool>& det_used, double min_iou, bool is_skip) {
    std::vector<LinkCandidate> candidates;
    for (std::size_t t = 0; t < tracks.size(); ++t) {
        if (tracks[t].last_frame() != head_frame) continue;
        const BoundingBox& head = tracks[t].members.back()->box;
        for (std::size_t d = 0; d < group.records.size(); ++d) {
            if (det_used[d]) continue;
            const double overlap = iou(head, group.records[d].box);
            if (overlap >= min_iou) candidates.push_back({overlap, t, d});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const LinkCandidate& a, const LinkCandidate& b) {
        return std::tie(b.overlap, a.track, a.det) < std::tie(a.overlap, b.track, b.det);
    });
    std::vector<bool> track_used(tracks.size(), false);
    for (const auto& c : candidates) {
        if (track_used[c.track] || det_used[c.det]) continue;
        track_used[c.track] = true;
        det_used[c.det] = true;
        if (is_skip) tracks[c.track].gaps.push_back(group.frame_index - 1);
        tracks[c.track].members.push_back(&group.records[c.det]);
    }
}

}  // namespace

std::vector<Tracklet> build_tracklets(const VideoDetections& video, const MiningConfig& cfg) {
    std::vector<OpenTrack> tracks;
    for (const auto& group : video.frames) {
        std::vector<bool> det_used(group.records.size(), false);
        link_round(tracks, group.frame_index - 1, group, det_used, cfg.hp_link_iou, false);
        link_round(tracks, group.frame_index - 2, group, det_used, cfg.hp_link_iou, true);
        for (std::size_t d = 0; d < group.records.size(); ++d) {
            if (!det_used[d]) tracks.push_back({{&group.records[d]}, {}});
        }
    }

    std::vector<Tracklet> out;
    for (const auto& t : tracks) {
        if (static_cast<int>(t.members.size()) < cfg.hp_min_tracklet_len) continue;
        Tracklet tracklet;
        tracklet.id = static_cast<std::int64_t>(out.size()) + 1;
        tracklet.video_id = video.video_id;
        for (const auto* m : t.members) tracklet.members.push_back(*m);
        tracklet.gap_frames = t.gaps;
        out.push_back(std::move(tracklet));
    }
    return out;
}

namespace {

std::optional<HardPositive> confirm_gap(const Tracklet& tracklet, std::int64_t gap, const VideoDetections& video,
                                        const FrameSource& frames, const MiningConfig& cfg) {
    auto member_at = [&](std::int64_t f) -> const DetectionRecord& {
        auto it = std::find_if(tracklet.members.begin(), tracklet.members.end(),
                               [f](const DetectionRecord& m) { return m.frame_index == f; });
        if (it == tracklet.members.end()) {
            throw InvalidInput("tracklet " + std::to_string(tracklet.id) + " has no member at frame " +
                               std::to_string(f) + " flanking gap " + std::to_string(gap));
        }
        return *it;
    };
    const DetectionRecord& before = member_at(gap - 1);
    const DetectionRecord& after = member_at(gap + 1);
    const BoundingBox candidate = interpolate(before.box, after.box, 0.5);

    if (const FrameGroup* group = video.find(gap)) {
        for (const auto& d : group->records) {
            if (iou(candidate, d.box) >= cfg.iou_isolation_threshold) return std::nullopt;
        }
    }

    const auto before_frame = frames.get(video.video_id, gap - 1);
    const auto gap_frame = frames.get(video.video_id, gap);
    if (before_frame->width() != gap_frame->width() || before_frame->height() != gap_frame->height()) {
        throw ImageError("adjacent frames differ in size");
    }
    const int fw = gap_frame->width();
    const int fh = gap_frame->height();
    const auto templ_rect = to_pixel_rect(before.box, fw, fh);
    if (!templ_rect) throw InvalidInput("tracklet member box outside frame");
    PixelRect window = *templ_rect;
    window.x = static_cast<int>(std::clamp<long>(std::lround(candidate.center_x() - 0.5 * window.w), 0L, fw - window.w));
    window.y = static_cast<int>(std::clamp<long>(std::lround(candidate.center_y() - 0.5 * window.h), 0L, fh - window.h));

    double score = 0.0;
    try {
        score = ncc(crop(*before_frame, *templ_rect), crop(*gap_frame, window));
    } catch (const ZeroVarianceError&) {
        return std::nullopt;
    }
    if (score < cfg.hp_ncc_confirm) return std::nullopt;
    return HardPositive{video.video_id, gap, candidate, tracklet.id, before, after, score};
}

}  // namespace

std::vector<HardPositive> find_off_flickers(const Tracklet& tracklet, const VideoDetections& video,
                                            const FrameSource& frames, const MiningConfig& cfg) {
    std::vector<HardPositive> out;
    for (const std::int64_t gap : tracklet.gap_frames) {
        if (auto hp = confirm_gap(tracklet, gap, video, frames, cfg)) out.push_back(std::move(*hp));
    }
    return out;
}

HardPositiveResult mine_hard_positives(const VideoDetections& video, const FrameSource& frames,
                                       const MiningConfig& cfg, unsigned workers) {
    HardPositiveResult result;
    result.tracklets = build_tracklets(video, cfg);

    std::vector<std::pair<const Tracklet*, std::int64_t>> jobs;
    for (const auto& t : result.tracklets)
        for (const auto g : t.gap_frames) jobs.emplace_back(&t, g);

    std::vector<std::optional<HardPositive>> confirmed(jobs.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto work = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                confirmed[i] = confirm_gap(*jobs[i].first, jobs[i].second, video, frames, cfg);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = jobs.size();
            }
        }
    };
    const unsigned n_threads = std::clamp<unsigned>(workers, 1, static_cast<unsigned>(std::max<std::size_t>(1, jobs.size())));
    if (n_threads == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);

    for (auto& hp : confirmed)
        if (hp) result.hard_positives.push_back(std::move(*hp));
    std::stable_sort(result.hard_positives.begin(), result.hard_positives.end(),
                     [](const HardPositive& a, const HardPositive& b) {
                         return std::tie(a.frame_index, a.tracklet_id) < std::tie(b.frame_index, b.tracklet_id);
                     });
    return result;
}

HardPositiveResult mine_hard_positives(const DetectionStream& stream, const FrameSource& frames,
                                       const MiningConfig& cfg, unsigned workers) {
    HardPositiveResult out;
    for (const auto& video : stream.videos) {
        auto r = mine_hard_positives(video, frames, cfg, workers);
        std::move(r.tracklets.begin(), r.tracklets.end(), std::back_inserter(out.tracklets));
        std::move(r.hard_positives.begin(), r.hard_positives.end(), std::back_inserter(out.hard_positives));
    }
    return out;
}

}  // namespace flickermine
