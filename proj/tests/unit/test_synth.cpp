#include <gtest/gtest.h>

#include <algorithm>

#include "fixtures.hpp"
#include "flickermine/errors.hpp"
#include "flickermine/frame_store.hpp"
#include "flickermine/geometry.hpp"
#include "flickermine/synth.hpp"

using namespace flickermine;
using namespace flickermine::synth;

namespace {

SyntheticScenario static_object(int frames) {
    SyntheticScenario s;
    s.frame_count = frames;
    s.objects.push_back(make_linear_object(24, 24, 60, 40, 0, 0, frames, 5));
    s.detector.jitter_sigma = 0.0;
    s.seed = 17;
    return s;
}

std::size_t count(const SyntheticVideo& v, ExpectedLabel label) {
    return static_cast<std::size_t>(std::count_if(v.truth.detections.begin(), v.truth.detections.end(),
                                                  [&](const TruthDetection& t) { return t.expected == label; }));
}

}  // namespace

TEST(Synth, StaticObjectWithoutNoise) {
    const auto v = generate(static_object(30));
    EXPECT_EQ(v.frames.size(), 30u);
    EXPECT_EQ(v.stream.detection_count(), 30u);
    EXPECT_EQ(count(v, ExpectedLabel::PseudoPositive), 30u);
    EXPECT_EQ(count(v, ExpectedLabel::HardNegative), 0u);
    EXPECT_TRUE(v.truth.hard_positives.empty());
    for (const auto& t : v.truth.detections) EXPECT_EQ(t.detection.box, (BoundingBox{60, 40, 24, 24}));
}

TEST(Synth, SpuriousFlickersAreExpectedHardNegatives) {
    auto s = static_object(30);
    s.detector.spurious_flicker_count = 5;
    const auto v = generate(s);
    EXPECT_EQ(count(v, ExpectedLabel::HardNegative), 5u);
    EXPECT_EQ(v.stream.detection_count(), 35u);
    for (const auto& t : v.truth.detections) {
        if (t.expected != ExpectedLabel::HardNegative) continue;
        EXPECT_EQ(t.object, -1);
        EXPECT_GE(t.detection.frame_index, 1);
        EXPECT_LE(t.detection.frame_index, 28);
        EXPECT_GE(t.detection.score, 0.82);
        EXPECT_EQ(iou(t.detection.box, {60, 40, 24, 24}), 0.0);
    }
}

TEST(Synth, InjectedMissIsExpectedHardPositive) {
    auto s = static_object(30);
    s.misses.push_back({0, 15});
    const auto v = generate(s);
    EXPECT_EQ(v.stream.detection_count(), 29u);
    ASSERT_EQ(v.truth.hard_positives.size(), 1u);
    EXPECT_EQ(v.truth.hard_positives[0].frame_index, 15);
    EXPECT_EQ(v.truth.hard_positives[0].box, (BoundingBox{60, 40, 24, 24}));
    EXPECT_TRUE(v.truth.occluded_gaps.empty());
}

TEST(Synth, OcclusionEvents) {
    auto s = static_object(20);
    s.occlusions.push_back({0, 5, 5, false});
    s.occlusions.push_back({0, 10, 12, true});
    const auto v = generate(s);
    EXPECT_EQ(v.stream.detection_count(), 19u);
    EXPECT_EQ(count(v, ExpectedLabel::Occluded), 3u);
    ASSERT_EQ(v.truth.occluded_gaps.size(), 1u);
    EXPECT_EQ(v.truth.occluded_gaps[0].frame_index, 5);
    EXPECT_TRUE(v.truth.hard_positives.empty());
    // The occluder replaces the object's pixels.
    EXPECT_NE(v.frames[5], v.frames[4]);
    EXPECT_EQ(v.frames[4], v.frames[6]);
    EXPECT_EQ(v.frames[10], v.frames[12]);
}

TEST(Synth, DeterministicFromSeed) {
    const auto p = random_params(99);
    const auto a = generate(make_scenario(p));
    const auto b = generate(make_scenario(p));
    EXPECT_EQ(a.frames, b.frames);
    EXPECT_EQ(a.stream, b.stream);
    EXPECT_EQ(a.video_id, "synth_99");
    const auto c = generate(make_scenario(random_params(100)));
    EXPECT_NE(a.frames, c.frames);
}

TEST(Synth, InvalidScenariosAreRejected) {
    auto s = static_object(10);
    s.objects[0].trajectory[3].x = 150;
    EXPECT_THROW(generate(s), InvalidInput);

    s = static_object(10);
    s.objects.push_back(make_linear_object(24, 24, 70, 50, 0, 0, 10, 6));
    EXPECT_THROW(generate(s), InvalidInput);

    s = static_object(10);
    s.occlusions.push_back({0, 4, 4, true});
    EXPECT_THROW(generate(s), InvalidInput);

    s = static_object(10);
    s.occlusions.push_back({0, 4, 6, false});
    s.misses.push_back({0, 5});
    EXPECT_THROW(generate(s), InvalidInput);

    s = static_object(10);
    s.misses.push_back({1, 5});
    EXPECT_THROW(generate(s), InvalidInput);

    s = static_object(10);
    s.frame_width = 40;
    s.frame_height = 30;
    s.objects.clear();
    s.objects.push_back(make_linear_object(24, 24, 0, 0, 0, 0, 10, 1));
    s.detector.spurious_flicker_count = 1;
    EXPECT_THROW(generate(s), InvalidInput);
}

TEST(Synth, GeneratedParametersAreValid) {
    for (std::uint64_t seed = 0; seed < 60; ++seed) {
        const auto inj = make_scenario(injection_params(seed));
        EXPECT_EQ(inj.detector.jitter_sigma, 0.0);
        EXPECT_EQ(inj.detector.miss_prob, 0.0);
        EXPECT_NO_THROW(generate(inj)) << "injection seed " << seed;
        EXPECT_NO_THROW(generate(make_scenario(random_params(seed)))) << "random seed " << seed;
    }
}

TEST(Synth, TexturesAreWellConditioned) {
    const auto p = make_texture(20, 20, 2, 3);
    ASSERT_EQ(p.levels.size(), 400u);
    double mean = 0;
    for (auto v : p.levels) mean += v;
    mean /= 400;
    double var = 0;
    for (auto v : p.levels) var += (v - mean) * (v - mean);
    EXPECT_GT(var / 400, 100.0);
    EXPECT_EQ(*std::min_element(p.levels.begin(), p.levels.end()) >= 20, true);
    EXPECT_EQ(*std::max_element(p.levels.begin(), p.levels.end()) <= 235, true);
}

TEST(Synth, WrittenVideoReadsBackIdentically) {
    const auto v = generate(make_scenario(injection_params(4)));
    fixtures::TempDir dir;
    write_video(v, dir.path());
    DirectoryFrameStore store(dir.path() / "frames");
    const auto mem = v.gray_frames();
    ASSERT_EQ(store.frame_count(v.video_id), static_cast<std::int64_t>(mem.size()));
    for (std::size_t f = 0; f < mem.size(); ++f) EXPECT_EQ(*store.get(v.video_id, static_cast<std::int64_t>(f)), mem[f]);
    EXPECT_EQ(parse_detection_stream(fixtures::read_text(dir.path() / "detections.jsonl")), v.stream);
    const std::string truth = fixtures::read_text(dir.path() / "ground_truth.jsonl");
    EXPECT_EQ(static_cast<std::size_t>(std::count(truth.begin(), truth.end(), '\n')),
              v.truth.detections.size() + v.truth.hard_positives.size() + v.truth.occluded_gaps.size());
}
