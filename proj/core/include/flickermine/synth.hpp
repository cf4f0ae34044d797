#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "flickermine/frame_store.hpp"
#include "flickermine/geometry.hpp"
#include "flickermine/ingest.hpp"

namespace flickermine::synth {

/// 8-bit gray texture.
struct Patch {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> levels;
};

/// Random texture: a coarse grid of levels in [20,235] (one per `cell` pixels) bilinearly
/// upsampled. High variance at every scale above the cell size keeps NCC well conditioned.
Patch make_texture(int width, int height, int cell, std::uint64_t seed);

struct SceneObject {
    Patch texture;
    std::vector<PixelRect> trajectory;  ///< one box per frame, texture-sized
};

/// Constant-velocity integer trajectory starting at (x, y).
SceneObject make_linear_object(int width, int height, int x, int y, int vx, int vy, int frame_count,
                               std::uint64_t texture_seed);

struct DetectorModel {
    double miss_prob = 0.0;             ///< independent per object per frame
    int spurious_flicker_count = 0;     ///< single-frame boxes on background
    double jitter_sigma = 1.5;          ///< px, applied to x and y of true detections (half to w, h)
    double true_score_min = 0.85;
    double true_score_max = 1.0;
    double spurious_score_min = 0.82;
    double spurious_score_max = 1.0;
    int below_threshold_count = 0;      ///< extra boxes scored in [0.05,0.7]
};

/// The object is painted over by `occluder` during [first_frame, last_frame]. With
/// `detected`, the detector keeps firing on it (needs a span of at least 2 frames);
/// otherwise those frames are dropouts.
struct OcclusionEvent {
    int object = 0;
    int first_frame = 0;
    int last_frame = 0;
    bool detected = false;
};

/// Non-occluded single-frame dropout of one object.
struct InjectedMiss {
    int object = 0;
    int frame = 0;
};

struct SyntheticScenario {
    std::string video_id = "synth";
    std::string category = "object";
    int frame_width = 160;
    int frame_height = 120;
    int frame_count = 24;
    std::vector<SceneObject> objects;
    DetectorModel detector;
    std::vector<OcclusionEvent> occlusions;
    std::vector<InjectedMiss> misses;
    /// Spurious boxes keep clear of every other box for this many frames on each side.
    int isolation_window = 5;
    std::uint64_t seed = 0;
};

enum class ExpectedLabel { PseudoPositive, HardNegative, Occluded, BelowThreshold };

std::string_view to_string(ExpectedLabel label) noexcept;

struct TruthDetection {
    DetectionRecord detection;
    ExpectedLabel expected = ExpectedLabel::PseudoPositive;
    int object = -1;  ///< -1 for spurious and below-threshold boxes
};

struct TruthGap {
    std::int64_t frame_index = 0;
    BoundingBox box;  ///< trajectory box
    int object = 0;
};

struct GroundTruth {
    std::vector<TruthDetection> detections;   ///< canonical order
    std::vector<TruthGap> hard_positives;     ///< visible single-frame dropouts flanked by detections
    std::vector<TruthGap> occluded_gaps;      ///< single-frame dropouts caused by occlusion
};

struct SyntheticVideo {
    std::string video_id;
    int width = 0;
    int height = 0;
    std::vector<std::vector<std::uint8_t>> frames;  ///< 8-bit gray, row-major
    DetectionStream stream;
    GroundTruth truth;

    std::vector<GrayImage> gray_frames() const;
    MemoryFrameStore frame_store() const;
};

/// Renders frames and samples detections. Deterministic in scenario.seed. Throws
/// InvalidInput when trajectories leave the frame or overlap, events reference unknown
/// objects or frames, or spurious boxes cannot be placed clear of everything else.
SyntheticVideo generate(const SyntheticScenario& scenario);

/// Knobs for make_scenario.
struct ScenarioParams {
    std::uint64_t seed = 0;
    std::string video_id;  ///< defaults to "synth_<seed>"
    int frame_width = 160;
    int frame_height = 120;
    int frame_count = 24;
    int object_count = 2;
    int min_object_size = 20;
    int max_object_size = 28;
    int max_speed = 2;
    int injected_misses = 0;
    int occluded_gaps = 0;
    int detected_occlusions = 0;
    DetectorModel detector;
};

/// Samples non-overlapping linear trajectories and valid miss / occlusion events.
SyntheticScenario make_scenario(const ScenarioParams& params);

/// Noise-free scenario (no jitter, no random misses) with spurious flickers, injected misses
/// and occlusion events, for exact-recovery checks.
ScenarioParams injection_params(std::uint64_t seed);

/// Varied scenario drawn from `seed`: jitter, random misses, sub-threshold boxes and events.
ScenarioParams random_params(std::uint64_t seed);

/// Writes `<dir>/frames/<video>/<%08d>.png`, `<dir>/detections.jsonl` and
/// `<dir>/ground_truth.jsonl`.
void write_video(const SyntheticVideo& video, const std::filesystem::path& dir);

}  // namespace flickermine::synth
