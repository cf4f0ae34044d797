#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flickermine/frame_store.hpp"
#include "flickermine/hn_miner.hpp"
#include "flickermine/hp_miner.hpp"

namespace flickermine {

enum class AnnotationSource { PseudoPositive, HardPositive };

std::string_view to_string(AnnotationSource source) noexcept;

struct RetrainingImage {
    std::int64_t id = 0;
    std::string video_id;
    std::int64_t frame_index = 0;
    int width = 0;
    int height = 0;
    std::string file_name;

    friend bool operator==(const RetrainingImage&, const RetrainingImage&) = default;
};

struct RetrainingAnnotation {
    std::int64_t id = 0;
    std::int64_t image_id = 0;
    BoundingBox box;
    AnnotationSource source = AnnotationSource::PseudoPositive;

    friend bool operator==(const RetrainingAnnotation&, const RetrainingAnnotation&) = default;
};

struct HardNegativeEntry {
    std::int64_t id = 0;
    std::int64_t image_id = 0;
    BoundingBox box;
    double score = 0.0;

    friend bool operator==(const HardNegativeEntry&, const HardNegativeEntry&) = default;
};

/// Images with positive annotations plus a sidecar list of hard-negative boxes.
struct RetrainingSet {
    std::string category;
    std::vector<RetrainingImage> images;
    std::vector<RetrainingAnnotation> annotations;
    std::vector<HardNegativeEntry> hard_negatives;

    friend bool operator==(const RetrainingSet&, const RetrainingSet&) = default;
};

/// A hard negative overlapping an annotation of its image at this IoU or more is dropped.
inline constexpr double kDuplicateIou = 0.5;

/// Assembles the retraining set.
///
/// Every frame of `hn_selection` contributes its PseudoPositive boxes as annotations and its
/// HardNegative boxes to the manifest. Every hard-positive frame contributes the interpolated
/// box plus the boxes of all tracklet members in that frame. Images reached both ways are
/// merged; identical annotations are kept once. Manifest boxes duplicating an annotation are
/// dropped, and a selected frame left without a hard negative (and not a hard-positive frame)
/// is dropped. Ids are assigned in sorted (video, frame, box) order, starting at 1.
///
/// Throws InvalidInput for a selected frame absent from `hn_labels`, a hard positive whose
/// tracklet is missing, or mixed categories.
RetrainingSet build_retraining_set(std::span<const LabeledDetection> hn_labels, const HardPositiveResult& hp,
                                   const std::set<FrameKey>& hn_selection, const FrameSource& frames);

/// `retrain_set.json`: {"images":[..],"annotations":[..],"categories":[..]}
std::string serialize_annotations(const RetrainingSet& set);
/// `hard_negatives.json`: {"category":..,"hard_negatives":[..]}
std::string serialize_hard_negatives(const RetrainingSet& set);

/// Reads both documents back. Throws ParseError on schema violations.
RetrainingSet parse_retraining_set(std::string_view annotations_json, std::string_view hard_negatives_json);

/// Invariant violations of a set (empty when valid): dangling image ids, hard negatives
/// duplicating an annotation, images with hard negatives but no pseudo-positive annotation.
std::vector<std::string> check_retraining_set(const RetrainingSet& set);

}  // namespace flickermine
