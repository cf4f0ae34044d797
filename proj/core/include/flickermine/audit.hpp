#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "flickermine/frame_store.hpp"
#include "flickermine/model.hpp"

namespace flickermine {

/// Human verdicts for a mined hard negative. "ambiguous" covers extreme pose, severe
/// occlusion and similar cases where neither verdict is defensible.
enum class AuditLabel { TrueNegative, TruePositive, Ambiguous };

std::string_view to_string(AuditLabel label) noexcept;
std::optional<AuditLabel> audit_label_from_string(std::string_view s) noexcept;

struct AuditItem {
    std::string crop_path;
    DetectionRecord detection;  ///< score and category are not part of the manifest
    std::string label;          ///< filled in by the reviewer
    std::size_t line = 0;       ///< manifest line, when parsed
};

struct AuditSample {
    std::uint64_t seed = 0;
    std::size_t population = 0;
    std::vector<AuditItem> items;  ///< in draw order
};

/// Context added around each crop, in pixels per side.
inline constexpr int kAuditCropMargin = 20;

/// Uniform draw of `n` items without replacement, reproducible from `seed`. The generator is
/// std::mt19937_64 driving a partial Fisher-Yates shuffle with rejection-sampled bounds, so
/// samples are identical across platforms and standard libraries. Throws InvalidInput when
/// n exceeds the population.
AuditSample sample_for_audit(std::span<const DetectionRecord> population, std::size_t n, std::uint64_t seed);

/// Writes each item's crop (box plus kAuditCropMargin, clamped) under `out_dir`.
void write_audit_crops(const AuditSample& sample, const FrameSource& frames, const std::filesystem::path& out_dir);

/// Tab-separated manifest: `#` header lines, then columns crop_path, video, frame, bbox, label.
void write_audit_manifest(std::ostream& out, const AuditSample& sample);
AuditSample parse_audit_manifest(std::istream& in);

struct AuditReport {
    std::size_t n_sampled = 0;
    std::size_t n_true_negative = 0;
    std::size_t n_true_positive = 0;
    std::size_t n_ambiguous = 0;
    double precision_tn = 0.0;                 ///< fraction, not percent
    double precision_tn_plus_ambiguous = 0.0;  ///< fraction, not percent

    /// Ratios recomputed from the counts.
    static AuditReport from_counts(std::size_t true_negative, std::size_t true_positive, std::size_t ambiguous);

    friend bool operator==(const AuditReport&, const AuditReport&) = default;
};

/// Tallies a fully labeled manifest. Throws ParseError naming the line of any unlabeled or
/// unknown-label row, and InvalidInput for an empty manifest.
AuditReport compute_purity(std::span<const AuditItem> items);

/// JSON rendering with counts, fractions and percentages rounded to 0.01.
std::string audit_report_json(const AuditReport& report);

}  // namespace flickermine
