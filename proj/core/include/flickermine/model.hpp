#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace flickermine {

/// Axis-aligned box, top-left corner plus size, continuous pixel coordinates.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double right() const noexcept { return x + w; }
    double bottom() const noexcept { return y + h; }
    double area() const noexcept { return w * h; }
    double center_x() const noexcept { return x + 0.5 * w; }
    double center_y() const noexcept { return y + 0.5 * h; }

    /// Finite fields, non-negative origin, strictly positive size.
    bool is_valid() const noexcept;

    friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// One detector output.
struct DetectionRecord {
    std::string video_id;
    std::int64_t frame_index = 0;
    BoundingBox box;
    double score = 0.0;
    std::string category;

    friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

/// Canonical order inside a video: frame, then box x, y, w, h, then descending score.
bool canonical_less(const DetectionRecord& a, const DetectionRecord& b) noexcept;

/// Thresholds driving both miners. Defaults are the published hard-negative settings.
struct MiningConfig {
    double score_threshold = 0.8;
    int temporal_window = 5;
    double enlargement_px = 100.0;
    double ncc_threshold = 0.5;
    double iou_isolation_threshold = 0.2;
    int min_valid_frames_per_side = 1;
    double hp_link_iou = 0.4;
    int hp_min_tracklet_len = 3;
    double hp_ncc_confirm = 0.5;

    friend bool operator==(const MiningConfig&, const MiningConfig&) = default;
};

/// Returns cfg unchanged when every field is in range; throws ConfigError naming the field otherwise.
MiningConfig validate_config(const MiningConfig& cfg);

/// Applies one `key=value` setting (keys are the MiningConfig field names). Throws ConfigError
/// on unknown keys or unparsable values. Range checks are left to validate_config.
void apply_config_setting(MiningConfig& cfg, std::string_view key, std::string_view value);

/// (key, value) pairs in declaration order, values printed round-trip exact.
std::vector<std::pair<std::string, std::string>> config_entries(const MiningConfig& cfg);

enum class LabelKind { HardNegative, PseudoPositive, Unverified };

std::string_view to_string(LabelKind kind) noexcept;
std::optional<LabelKind> label_kind_from_string(std::string_view s) noexcept;

/// What one adjacent frame says about a detection.
enum class EvidenceStatus { Consistent, Isolated, MatchRejected, OutOfRange };

std::string_view to_string(EvidenceStatus status) noexcept;
std::optional<EvidenceStatus> evidence_status_from_string(std::string_view s) noexcept;

/// Tracklet prediction: the detection box moved to its best template match.
struct TrackletPrediction {
    BoundingBox box;
    double ncc = 0.0;

    friend bool operator==(const TrackletPrediction&, const TrackletPrediction&) = default;
};

struct AdjacentEvidence {
    std::int64_t frame_index = 0;
    EvidenceStatus status = EvidenceStatus::OutOfRange;
    /// Present only for Consistent / Isolated.
    std::optional<TrackletPrediction> prediction;
    /// NCC of the best match, also kept for below-threshold rejections. Absent for
    /// zero-variance failures and out-of-range frames.
    std::optional<double> ncc;
    /// Max IoU between prediction and that frame's detections; present with prediction.
    std::optional<double> max_iou;

    friend bool operator==(const AdjacentEvidence&, const AdjacentEvidence&) = default;
};

struct MiningLabel {
    LabelKind kind = LabelKind::Unverified;
    std::vector<AdjacentEvidence> evidence;

    friend bool operator==(const MiningLabel&, const MiningLabel&) = default;
};

/// A detection together with its verdict.
struct LabeledDetection {
    DetectionRecord detection;
    MiningLabel label;

    friend bool operator==(const LabeledDetection&, const LabeledDetection&) = default;
};

/// Interpolated box for a single-frame detection dropout inside a tracklet.
struct HardPositive {
    std::string video_id;
    std::int64_t frame_index = 0;
    BoundingBox box;
    std::int64_t tracklet_id = 0;
    DetectionRecord flank_before;
    DetectionRecord flank_after;
    double ncc_confirm_score = 0.0;

    friend bool operator==(const HardPositive&, const HardPositive&) = default;
};

}  // namespace flickermine
