#include "flickermine/audit.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "flickermine/errors.hpp"
#include "flickermine/geometry.hpp"
#include "flickermine/image_io.hpp"

namespace flickermine {

std::string_view to_string(AuditLabel label) noexcept {
    switch (label) {
        case AuditLabel::TrueNegative: return "true_negative";
        case AuditLabel::TruePositive: return "true_positive";
        case AuditLabel::Ambiguous: return "ambiguous";
    }
    return "ambiguous";
}

std::optional<AuditLabel> audit_label_from_string(std::string_view s) noexcept {
    if (s == "true_negative") return AuditLabel::TrueNegative;
    if (s == "true_positive") return AuditLabel::TruePositive;
    if (s == "ambiguous") return AuditLabel::Ambiguous;
    return std::nullopt;
}

namespace {

// Uniform integer in [0, bound) without modulo bias.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x;
    do {
        x = rng();
    } while (x >= limit);
    return x % bound;
}

std::string crop_name(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "crops/%06zu.png", i + 1);
    return buf;
}

std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto tab = line.find('\t', start);
        out.push_back(line.substr(start, tab == std::string::npos ? std::string::npos : tab - start));
        if (tab == std::string::npos) break;
        start = tab + 1;
    }
    return out;
}

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \r\n");
    return s.substr(first, last - first + 1);
}

template <typename T>
T parse_field(const std::string& text, std::size_t line, const char* what) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
        throw ParseError(std::string("cannot parse ") + what + " '" + text + "'", line);
    }
    return v;
}

}  // namespace

AuditSample sample_for_audit(std::span<const DetectionRecord> population, std::size_t n, std::uint64_t seed) {
    if (n > population.size()) {
        throw InvalidInput("cannot sample " + std::to_string(n) + " items from a population of " +
                           std::to_string(population.size()));
    }
    std::vector<std::size_t> order(population.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(bounded(rng, population.size() - i));
        std::swap(order[i], order[j]);
    }
    AuditSample sample;
    sample.seed = seed;
    sample.population = population.size();
    for (std::size_t i = 0; i < n; ++i) {
        const DetectionRecord& d = population[order[i]];
        if (d.video_id.find_first_of("\t\n\r") != std::string::npos) {
            throw InvalidInput("video id '" + d.video_id + "' cannot be written to a tab-separated manifest");
        }
        sample.items.push_back({crop_name(i), d, {}, 0});
    }
    return sample;
}

void write_audit_crops(const AuditSample& sample, const FrameSource& frames, const std::filesystem::path& out_dir) {
    for (const auto& item : sample.items) {
        const RgbImage frame = frames.color(item.detection.video_id, item.detection.frame_index);
        const BoundingBox context =
            enlarge_clamped(item.detection.box, kAuditCropMargin, frame.width, frame.height);
        const auto rect = to_pixel_rect(context, frame.width, frame.height);
        if (!rect) throw InvalidInput("audit box outside its frame");
        RgbImage crop{rect->w, rect->h, {}};
        crop.data.reserve(static_cast<std::size_t>(rect->w) * rect->h * 3);
        for (int y = rect->y; y < rect->bottom(); ++y) {
            const auto* row = frame.data.data() + (static_cast<std::size_t>(y) * frame.width + rect->x) * 3;
            crop.data.insert(crop.data.end(), row, row + static_cast<std::size_t>(rect->w) * 3);
        }
        write_rgb_png(out_dir / item.crop_path, crop);
    }
}

void write_audit_manifest(std::ostream& out, const AuditSample& sample) {
    out << "# flickermine audit sample\n";
    out << "# generator=mt19937_64 seed=" << sample.seed << " population=" << sample.population
        << " n=" << sample.items.size() << "\n";
    out << "# label vocabulary: true_negative | true_positive | ambiguous\n";
    out << "crop_path\tvideo\tframe\tbbox\tlabel\n";
    for (const auto& item : sample.items) {
        const auto& b = item.detection.box;
        out << item.crop_path << '\t' << item.detection.video_id << '\t' << item.detection.frame_index << '\t'
            << format_real(b.x) << ',' << format_real(b.y) << ',' << format_real(b.w) << ',' << format_real(b.h)
            << '\t' << item.label << '\n';
    }
}

AuditSample parse_audit_manifest(std::istream& in) {
    AuditSample sample;
    std::string line;
    std::size_t line_no = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream words(line.substr(1));
            std::string word;
            while (words >> word) {
                if (word.rfind("seed=", 0) == 0) sample.seed = parse_field<std::uint64_t>(word.substr(5), line_no, "seed");
                if (word.rfind("population=", 0) == 0)
                    sample.population = parse_field<std::size_t>(word.substr(11), line_no, "population");
            }
            continue;
        }
        if (!header_seen) {
            if (line.rfind("crop_path\t", 0) != 0) throw ParseError("missing column header", line_no);
            header_seen = true;
            continue;
        }
        auto cols = split_tabs(line);
        if (cols.size() == 4) cols.emplace_back();
        if (cols.size() != 5) throw ParseError("expected 5 tab-separated columns", line_no);
        AuditItem item;
        item.line = line_no;
        item.crop_path = cols[0];
        item.detection.video_id = cols[1];
        item.detection.frame_index = parse_field<std::int64_t>(cols[2], line_no, "frame");
        std::array<double, 4> b{};
        std::istringstream parts(cols[3]);
        std::string part;
        std::size_t k = 0;
        while (std::getline(parts, part, ',')) {
            if (k == 4) throw ParseError("bbox must have 4 components", line_no);
            b[k++] = parse_field<double>(part, line_no, "bbox");
        }
        if (k != 4) throw ParseError("bbox must have 4 components", line_no);
        item.detection.box = {b[0], b[1], b[2], b[3]};
        item.label = trim(cols[4]);
        sample.items.push_back(std::move(item));
    }
    if (!header_seen) throw ParseError("missing column header");
    return sample;
}

AuditReport AuditReport::from_counts(std::size_t true_negative, std::size_t true_positive, std::size_t ambiguous) {
    AuditReport r;
    r.n_true_negative = true_negative;
    r.n_true_positive = true_positive;
    r.n_ambiguous = ambiguous;
    r.n_sampled = true_negative + true_positive + ambiguous;
    if (r.n_sampled > 0) {
        const double n = static_cast<double>(r.n_sampled);
        r.precision_tn = static_cast<double>(true_negative) / n;
        r.precision_tn_plus_ambiguous = static_cast<double>(true_negative + ambiguous) / n;
    }
    return r;
}

AuditReport compute_purity(std::span<const AuditItem> items) {
    if (items.empty()) throw InvalidInput("audit manifest has no rows");
    std::size_t tn = 0;
    std::size_t tp = 0;
    std::size_t amb = 0;
    for (const auto& item : items) {
        if (item.label.empty()) throw ParseError("row is not labeled", item.line);
        const auto label = audit_label_from_string(item.label);
        if (!label) throw ParseError("unknown label '" + item.label + "'", item.line);
        switch (*label) {
            case AuditLabel::TrueNegative: ++tn; break;
            case AuditLabel::TruePositive: ++tp; break;
            case AuditLabel::Ambiguous: ++amb; break;
        }
    }
    return AuditReport::from_counts(tn, tp, amb);
}

std::string audit_report_json(const AuditReport& report) {
    auto percent = [](double fraction) { return std::round(fraction * 10000.0) / 100.0; };
    nlohmann::ordered_json j;
    j["n_sampled"] = report.n_sampled;
    j["n_true_negative"] = report.n_true_negative;
    j["n_true_positive"] = report.n_true_positive;
    j["n_ambiguous"] = report.n_ambiguous;
    j["precision_tn"] = report.precision_tn;
    j["precision_tn_plus_ambiguous"] = report.precision_tn_plus_ambiguous;
    j["precision_tn_percent"] = percent(report.precision_tn);
    j["precision_tn_plus_ambiguous_percent"] = percent(report.precision_tn_plus_ambiguous);
    return j.dump(2) + "\n";
}

}  // namespace flickermine
