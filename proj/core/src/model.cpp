#include "flickermine/model.hpp"

#include <charconv>
#include <cmath>
#include <tuple>

#include "flickermine/errors.hpp"

namespace flickermine {

bool BoundingBox::is_valid() const noexcept {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h) &&
           x >= 0.0 && y >= 0.0 && w > 0.0 && h > 0.0;
}

bool canonical_less(const DetectionRecord& a, const DetectionRecord& b) noexcept {
    const double neg_a = -a.score;
    const double neg_b = -b.score;
    return std::tie(a.frame_index, a.box.x, a.box.y, a.box.w, a.box.h, neg_a, a.category) <
           std::tie(b.frame_index, b.box.x, b.box.y, b.box.w, b.box.h, neg_b, b.category);
}

namespace {

void require(bool ok, const char* message) {
    if (!ok) throw ConfigError(message);
}

bool in_closed(double v, double lo, double hi) { return std::isfinite(v) && v >= lo && v <= hi; }

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const char* first = value.data();
    const char* last = value.data() + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("cannot parse value '" + std::string(value) + "' for " + std::string(key));
    }
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

MiningConfig validate_config(const MiningConfig& cfg) {
    require(std::isfinite(cfg.score_threshold) && cfg.score_threshold > 0.0 && cfg.score_threshold <= 1.0,
            "score_threshold must be in (0,1]");
    require(cfg.temporal_window >= 1, "temporal_window must be ≥ 1");
    require(std::isfinite(cfg.enlargement_px) && cfg.enlargement_px >= 0.0, "enlargement_px must be ≥ 0");
    require(in_closed(cfg.ncc_threshold, -1.0, 1.0), "ncc_threshold must be in [-1,1]");
    require(std::isfinite(cfg.iou_isolation_threshold) && cfg.iou_isolation_threshold > 0.0 &&
                cfg.iou_isolation_threshold <= 1.0,
            "iou_isolation_threshold must be in (0,1]");
    require(cfg.min_valid_frames_per_side >= 1 && cfg.min_valid_frames_per_side <= cfg.temporal_window,
            "min_valid_frames_per_side must be in [1,temporal_window]");
    require(std::isfinite(cfg.hp_link_iou) && cfg.hp_link_iou > 0.0 && cfg.hp_link_iou <= 1.0,
            "hp_link_iou must be in (0,1]");
    require(cfg.hp_min_tracklet_len >= 2, "hp_min_tracklet_len must be ≥ 2");
    require(in_closed(cfg.hp_ncc_confirm, -1.0, 1.0), "hp_ncc_confirm must be in [-1,1]");
    return cfg;
}

void apply_config_setting(MiningConfig& cfg, std::string_view key, std::string_view value) {
    if (key == "score_threshold") cfg.score_threshold = parse_number<double>(key, value);
    else if (key == "temporal_window") cfg.temporal_window = parse_number<int>(key, value);
    else if (key == "enlargement_px") cfg.enlargement_px = parse_number<double>(key, value);
    else if (key == "ncc_threshold") cfg.ncc_threshold = parse_number<double>(key, value);
    else if (key == "iou_isolation_threshold") cfg.iou_isolation_threshold = parse_number<double>(key, value);
    else if (key == "min_valid_frames_per_side") cfg.min_valid_frames_per_side = parse_number<int>(key, value);
    else if (key == "hp_link_iou") cfg.hp_link_iou = parse_number<double>(key, value);
    else if (key == "hp_min_tracklet_len") cfg.hp_min_tracklet_len = parse_number<int>(key, value);
    else if (key == "hp_ncc_confirm") cfg.hp_ncc_confirm = parse_number<double>(key, value);
    else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::vector<std::pair<std::string, std::string>> config_entries(const MiningConfig& cfg) {
    return {
        {"score_threshold", format_double(cfg.score_threshold)},
        {"temporal_window", std::to_string(cfg.temporal_window)},
        {"enlargement_px", format_double(cfg.enlargement_px)},
        {"ncc_threshold", format_double(cfg.ncc_threshold)},
        {"iou_isolation_threshold", format_double(cfg.iou_isolation_threshold)},
        {"min_valid_frames_per_side", std::to_string(cfg.min_valid_frames_per_side)},
        {"hp_link_iou", format_double(cfg.hp_link_iou)},
        {"hp_min_tracklet_len", std::to_string(cfg.hp_min_tracklet_len)},
        {"hp_ncc_confirm", format_double(cfg.hp_ncc_confirm)},
    };
}

std::string_view to_string(LabelKind kind) noexcept {
    switch (kind) {
        case LabelKind::HardNegative: return "hard_negative";
        case LabelKind::PseudoPositive: return "pseudo_positive";
        case LabelKind::Unverified: return "unverified";
    }
    return "unverified";
}

std::optional<LabelKind> label_kind_from_string(std::string_view s) noexcept {
    if (s == "hard_negative") return LabelKind::HardNegative;
    if (s == "pseudo_positive") return LabelKind::PseudoPositive;
    if (s == "unverified") return LabelKind::Unverified;
    return std::nullopt;
}

std::string_view to_string(EvidenceStatus status) noexcept {
    switch (status) {
        case EvidenceStatus::Consistent: return "consistent";
        case EvidenceStatus::Isolated: return "isolated";
        case EvidenceStatus::MatchRejected: return "match_rejected";
        case EvidenceStatus::OutOfRange: return "out_of_range";
    }
    return "out_of_range";
}

std::optional<EvidenceStatus> evidence_status_from_string(std::string_view s) noexcept {
    if (s == "consistent") return EvidenceStatus::Consistent;
    if (s == "isolated") return EvidenceStatus::Isolated;
    if (s == "match_rejected") return EvidenceStatus::MatchRejected;
    if (s == "out_of_range") return EvidenceStatus::OutOfRange;
    return std::nullopt;
}

}  // namespace flickermine
