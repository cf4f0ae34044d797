#pragma once

// Brute-force reference implementations used only by the tests. Nothing here calls the
// library's geometry, image or mining code; shared pieces are plain data types.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "flickermine/model.hpp"
#include "flickermine/synth.hpp"

namespace oracle {

using flickermine::BoundingBox;
using flickermine::DetectionRecord;
using flickermine::LabelKind;
using flickermine::MiningConfig;

double box_iou(const BoundingBox& a, const BoundingBox& b);

/// Zero-mean correlation by direct summation; nullopt when either patch is flat.
std::optional<double> direct_ncc(const std::vector<double>& a, const std::vector<double>& b);

struct Placement {
    int x = 0;
    int y = 0;
    double ncc = 0.0;
};

/// Every placement of the template inside the region, scanned row by row; strict improvement
/// keeps the first maximum. nullopt when the template or every window is flat.
std::optional<Placement> direct_match(const std::vector<double>& templ, int tw, int th,
                                      const std::vector<double>& region, int rw, int rh);

struct Label {
    DetectionRecord detection;
    LabelKind kind = LabelKind::Unverified;
    int consistent = 0;
    int isolated_before = 0;
    int isolated_after = 0;
};

/// Label of every detection with score >= cfg.score_threshold, in canonical order.
std::vector<Label> hn_labels(const flickermine::synth::SyntheticVideo& video, const MiningConfig& cfg);

struct Track {
    std::int64_t id = 0;
    std::vector<DetectionRecord> members;
    std::vector<std::int64_t> gaps;
};

struct HardPositive {
    std::int64_t frame = 0;
    BoundingBox box;
    std::int64_t track_id = 0;
    double ncc = 0.0;
};

struct HpResult {
    std::vector<Track> tracks;
    std::vector<HardPositive> hard_positives;  ///< by (frame, track id)
};

HpResult hard_positives(const flickermine::synth::SyntheticVideo& video, const MiningConfig& cfg);

/// One seeded scenario of the equivalence suite and the config it is mined with.
struct SuiteCase {
    std::string name;
    flickermine::synth::SyntheticScenario scenario;
    MiningConfig cfg;
};

/// Injection and random scenarios with a 16 px search margin, then a few at the default config.
std::vector<SuiteCase> equivalence_suite();

/// Line-oriented dump of labels, tracks and hard positives, as frozen in the golden sweep.
std::string format_case(const std::string& name, const std::vector<Label>& labels, const HpResult& hp);

}  // namespace oracle
