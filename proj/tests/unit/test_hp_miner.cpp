#include <gtest/gtest.h>

#include <map>

#include "fixtures.hpp"
#include "flickermine/errors.hpp"
#include "flickermine/hp_miner.hpp"
#include "flickermine/ingest.hpp"

using namespace flickermine;
using fixtures::det;

namespace {

constexpr int kW = 96;
constexpr int kH = 72;

/// 16x16 object moving 2 px per frame to the right from (10, 20); `replace` swaps the object
/// for another patch in the listed frames.
std::vector<GrayImage> video(int frames, const std::map<int, GrayImage>& replace = {}) {
    const auto background = fixtures::noise_image(kW, kH, 1);
    const auto object = fixtures::noise_image(16, 16, 2);
    std::vector<GrayImage> out;
    for (int f = 0; f < frames; ++f) {
        auto img = background;
        auto it = replace.find(f);
        fixtures::paste(img, it == replace.end() ? object : it->second, 10 + 2 * f, 20);
        out.push_back(std::move(img));
    }
    return out;
}

DetectionRecord obj(std::int64_t f) { return det("v", f, 10 + 2.0 * f, 20, 16, 16); }

std::vector<Tracklet> link(const std::vector<DetectionRecord>& recs, MiningConfig cfg = {}) {
    const auto s = DetectionStream::from_records(recs);
    return build_tracklets(s.videos.at(0), cfg);
}

}  // namespace

TEST(Tracklets, ContinuousTrackHasNoGaps) {
    const auto t = link({obj(0), obj(1), obj(2)});
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].id, 1);
    EXPECT_EQ(t[0].video_id, "v");
    EXPECT_EQ(t[0].members.size(), 3u);
    EXPECT_TRUE(t[0].gap_frames.empty());
}

TEST(Tracklets, SingleFrameSkipIsRecorded) {
    const auto t = link({obj(0), obj(1), obj(3), obj(4)});
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].gap_frames, (std::vector<std::int64_t>{2}));
}

TEST(Tracklets, TwoFrameSkipSplitsTheTrack) {
    EXPECT_TRUE(link({obj(0), obj(1), obj(4), obj(5)}).empty());
    MiningConfig cfg;
    cfg.hp_min_tracklet_len = 2;
    const auto t = link({obj(0), obj(1), obj(4), obj(5)}, cfg);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[1].id, 2);
    EXPECT_EQ(t[1].members.front().frame_index, 4);
}

TEST(Tracklets, HigherOverlapWins) {
    MiningConfig cfg;
    cfg.hp_min_tracklet_len = 2;
    // A (0,0) and B (3,0) in frame 0; the frame-1 box at (2,0) overlaps B more (0.8 vs 0.667).
    const auto t = link({det("v", 0, 0, 0, 10, 10), det("v", 0, 3, 0, 10, 10), det("v", 1, 2, 0, 10, 10)}, cfg);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].members.front().box.x, 3);
}

TEST(Tracklets, EqualOverlapGoesToOlderTrack) {
    MiningConfig cfg;
    cfg.hp_min_tracklet_len = 2;
    const auto t = link({det("v", 0, 0, 0, 10, 10), det("v", 0, 4, 0, 10, 10), det("v", 1, 2, 0, 10, 10)}, cfg);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].members.front().box.x, 0);
}

TEST(Tracklets, AdjacentFrameHeadsComeBeforeSkips) {
    MiningConfig cfg;
    cfg.hp_min_tracklet_len = 2;
    // Track A ends at frame 0 with overlap 0.67 to the frame-2 box; track B ends at frame 1 with 0.43.
    const auto t = link({det("v", 0, 0, 0, 10, 10), det("v", 1, 6, 0, 10, 10), det("v", 2, 2, 0, 10, 10),
                         det("v", 3, 40, 40, 5, 5), det("v", 4, 40, 40, 5, 5)},
                        cfg);
    ASSERT_EQ(t.size(), 2u);
    EXPECT_EQ(t[0].members.front().frame_index, 1);
    EXPECT_EQ(t[0].members.back().frame_index, 2);
    EXPECT_TRUE(t[0].gap_frames.empty());
    EXPECT_EQ(t[1].members.front().frame_index, 3);
}

TEST(Tracklets, OneToOneMatching) {
    MiningConfig cfg;
    cfg.hp_min_tracklet_len = 2;
    const auto t = link({det("v", 0, 0, 0, 10, 10), det("v", 1, 0, 0, 10, 10), det("v", 1, 1, 0, 10, 10)}, cfg);
    ASSERT_EQ(t.size(), 1u);
    EXPECT_EQ(t[0].members.size(), 2u);
}

TEST(OffFlickers, InterpolatedDropoutIsConfirmed) {
    MemoryFrameStore frames;
    frames.add_video("v", video(6));
    const auto s = DetectionStream::from_records({obj(0), obj(1), obj(3), obj(4), obj(5)});
    const MiningConfig cfg;
    const auto r = mine_hard_positives(s.videos[0], frames, cfg);
    ASSERT_EQ(r.hard_positives.size(), 1u);
    const auto& hp = r.hard_positives[0];
    EXPECT_EQ(hp.frame_index, 2);
    EXPECT_EQ(hp.box, obj(2).box);
    EXPECT_EQ(hp.tracklet_id, 1);
    EXPECT_EQ(hp.flank_before, obj(1));
    EXPECT_EQ(hp.flank_after, obj(3));
    EXPECT_NEAR(hp.ncc_confirm_score, 1.0, 1e-9);
}

TEST(OffFlickers, OverlappingDetectionInGapFrameBlocks) {
    MemoryFrameStore frames;
    frames.add_video("v", video(6));
    // Shifted 9 px from the dropout: IoU 0.28 with the candidate, below the link threshold to the flanks.
    const auto s = DetectionStream::from_records({obj(0), obj(1), det("v", 2, 23, 20, 16, 16), obj(3), obj(4)});
    const auto r = mine_hard_positives(s.videos[0], frames, MiningConfig{});
    ASSERT_EQ(r.tracklets.size(), 1u);
    EXPECT_EQ(r.tracklets[0].gap_frames, (std::vector<std::int64_t>{2}));
    EXPECT_TRUE(r.hard_positives.empty());
}

TEST(OffFlickers, AppearanceChangeBlocks) {
    MemoryFrameStore frames;
    frames.add_video("v", video(6, {{2, fixtures::noise_image(16, 16, 99)}}));
    frames.add_video("w", video(6, {{2, fixtures::flat_image(16, 16, 0.5)}}));
    std::vector<DetectionRecord> recs;
    for (const char* v : {"v", "w"}) {
        for (int f : {0, 1, 3, 4}) {
            auto d = obj(f);
            d.video_id = v;
            recs.push_back(d);
        }
    }
    const auto s = DetectionStream::from_records(recs);
    const auto r = mine_hard_positives(s, frames, MiningConfig{});
    EXPECT_EQ(r.tracklets.size(), 2u);
    EXPECT_TRUE(r.hard_positives.empty());
}

TEST(OffFlickers, WindowIsClampedAtTheBorder) {
    // The candidate is narrower than the flank patch, so the centred window would start at x = -1.
    const auto background = fixtures::noise_image(kW, kH, 1);
    const auto object = fixtures::noise_image(16, 16, 2);
    std::vector<GrayImage> v;
    for (int f = 0; f < 4; ++f) {
        auto img = background;
        fixtures::paste(img, object, 0, 20);
        v.push_back(img);
    }
    MemoryFrameStore frames;
    frames.add_video("v", v);
    const auto s = DetectionStream::from_records(
        {det("v", 0, 0, 20, 16, 16), det("v", 1, 0, 20, 16, 16), det("v", 3, 0, 20, 12, 16)});
    const auto t = build_tracklets(s.videos[0], MiningConfig{});
    ASSERT_EQ(t.size(), 1u);
    const auto hp = find_off_flickers(t[0], s.videos[0], frames, MiningConfig{});
    ASSERT_EQ(hp.size(), 1u);
    EXPECT_EQ(hp[0].box, (BoundingBox{0, 20, 14, 16}));
    EXPECT_NEAR(hp[0].ncc_confirm_score, 1.0, 1e-9);
}

TEST(OffFlickers, WorkersDoNotChangeResults) {
    MemoryFrameStore frames;
    frames.add_video("v", video(12));
    std::vector<DetectionRecord> recs;
    for (int f = 0; f < 12; ++f)
        if (f != 3 && f != 7 && f != 9) recs.push_back(obj(f));
    const auto s = DetectionStream::from_records(recs);
    const auto a = mine_hard_positives(s, frames, MiningConfig{}, 1);
    const auto b = mine_hard_positives(s, frames, MiningConfig{}, 3);
    EXPECT_EQ(a.tracklets, b.tracklets);
    EXPECT_EQ(a.hard_positives, b.hard_positives);
    ASSERT_EQ(a.hard_positives.size(), 3u);
    EXPECT_EQ(a.hard_positives[1].frame_index, 7);
}

TEST(OffFlickers, MissingFlankIsAnError) {
    MemoryFrameStore frames;
    frames.add_video("v", video(5));
    const auto s = DetectionStream::from_records({obj(0), obj(1), obj(3)});
    Tracklet t{1, "v", {obj(0), obj(1)}, {3}};
    EXPECT_THROW(find_off_flickers(t, s.videos[0], frames, MiningConfig{}), InvalidInput);
}
