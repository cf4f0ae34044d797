#include "flickermine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <json.hpp>

#include "flickermine/errors.hpp"
#include "flickermine/image_io.hpp"

namespace flickermine::synth {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) { return splitmix64(seed ^ splitmix64(salt)); }

// Portable draws on top of mt19937_64; the standard distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Inclusive range.
    int uniform_int(int lo, int hi) {
        const auto span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo + 1);
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
        std::uint64_t x;
        do {
            x = engine_();
        } while (x >= limit);
        return lo + static_cast<int>(x % span);
    }

    bool bernoulli(double p) { return uniform() < p; }

    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 engine_;
};

bool overlaps(const PixelRect& a, const PixelRect& b, int margin) {
    return a.x - margin < b.right() && b.x - margin < a.right() && a.y - margin < b.bottom() &&
           b.y - margin < a.bottom();
}

bool inside(const PixelRect& r, int w, int h) {
    return r.w > 0 && r.h > 0 && r.x >= 0 && r.y >= 0 && r.right() <= w && r.bottom() <= h;
}

void paint(std::vector<std::uint8_t>& frame, int frame_w, const Patch& patch, const PixelRect& at) {
    for (int y = 0; y < patch.height; ++y) {
        std::copy_n(patch.levels.begin() + static_cast<std::ptrdiff_t>(y) * patch.width, patch.width,
                    frame.begin() + static_cast<std::ptrdiff_t>(at.y + y) * frame_w + at.x);
    }
}

const OcclusionEvent* occlusion_at(const SyntheticScenario& s, int object, int frame) {
    for (const auto& e : s.occlusions) {
        if (e.object == object && frame >= e.first_frame && frame <= e.last_frame) return &e;
    }
    return nullptr;
}

void validate(const SyntheticScenario& s) {
    if (s.frame_width <= 0 || s.frame_height <= 0 || s.frame_count <= 0) {
        throw InvalidInput("scenario frame dimensions and count must be positive");
    }
    const int n_obj = static_cast<int>(s.objects.size());
    for (int i = 0; i < n_obj; ++i) {
        const auto& o = s.objects[static_cast<std::size_t>(i)];
        if (static_cast<int>(o.trajectory.size()) != s.frame_count) {
            throw InvalidInput("object " + std::to_string(i) + " trajectory length differs from frame count");
        }
        for (const auto& r : o.trajectory) {
            if (!inside(r, s.frame_width, s.frame_height)) {
                throw InvalidInput("object " + std::to_string(i) + " leaves the frame");
            }
            if (r.w != o.texture.width || r.h != o.texture.height) {
                throw InvalidInput("object " + std::to_string(i) + " box differs from its texture size");
            }
        }
        for (int j = 0; j < i; ++j) {
            for (int f = 0; f < s.frame_count; ++f) {
                if (overlaps(o.trajectory[static_cast<std::size_t>(f)],
                             s.objects[static_cast<std::size_t>(j)].trajectory[static_cast<std::size_t>(f)], 0)) {
                    throw InvalidInput("objects " + std::to_string(j) + " and " + std::to_string(i) + " overlap");
                }
            }
        }
    }
    for (const auto& e : s.occlusions) {
        if (e.object < 0 || e.object >= n_obj) throw InvalidInput("occlusion references an unknown object");
        if (e.first_frame < 0 || e.last_frame >= s.frame_count || e.first_frame > e.last_frame) {
            throw InvalidInput("occlusion span outside the video");
        }
        if (e.detected && e.last_frame == e.first_frame) {
            throw InvalidInput("a detected occlusion must span at least 2 frames");
        }
    }
    for (const auto& m : s.misses) {
        if (m.object < 0 || m.object >= n_obj) throw InvalidInput("miss references an unknown object");
        if (m.frame < 0 || m.frame >= s.frame_count) throw InvalidInput("miss frame outside the video");
        if (occlusion_at(s, m.object, m.frame)) throw InvalidInput("miss frame is occluded");
    }
    if (s.detector.spurious_flicker_count > 0 && s.frame_count < 3) {
        throw InvalidInput("spurious flickers need at least 3 frames");
    }
}

}  // namespace

std::string_view to_string(ExpectedLabel label) noexcept {
    switch (label) {
        case ExpectedLabel::PseudoPositive: return "pseudo_positive";
        case ExpectedLabel::HardNegative: return "hard_negative";
        case ExpectedLabel::Occluded: return "occluded";
        case ExpectedLabel::BelowThreshold: return "below_threshold";
    }
    return "below_threshold";
}

Patch make_texture(int width, int height, int cell, std::uint64_t seed) {
    if (width <= 0 || height <= 0 || cell <= 0) throw InvalidInput("texture size and cell must be positive");
    Rng rng(seed);
    const int gw = width / cell + 2;
    const int gh = height / cell + 2;
    std::vector<double> grid(static_cast<std::size_t>(gw) * gh);
    for (auto& g : grid) g = rng.uniform(20.0, 235.0);
    Patch p{width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height)};
    for (int y = 0; y < height; ++y) {
        const double gy = static_cast<double>(y) / cell;
        const int iy = static_cast<int>(gy);
        const double fy = gy - iy;
        for (int x = 0; x < width; ++x) {
            const double gx = static_cast<double>(x) / cell;
            const int ix = static_cast<int>(gx);
            const double fx = gx - ix;
            auto g = [&](int cx, int cy) { return grid[static_cast<std::size_t>(cy) * gw + cx]; };
            const double v = (1 - fy) * ((1 - fx) * g(ix, iy) + fx * g(ix + 1, iy)) +
                             fy * ((1 - fx) * g(ix, iy + 1) + fx * g(ix + 1, iy + 1));
            p.levels[static_cast<std::size_t>(y) * width + x] = static_cast<std::uint8_t>(std::lround(v));
        }
    }
    return p;
}

SceneObject make_linear_object(int width, int height, int x, int y, int vx, int vy, int frame_count,
                               std::uint64_t texture_seed) {
    SceneObject o;
    o.texture = make_texture(width, height, 2, texture_seed);
    for (int f = 0; f < frame_count; ++f) o.trajectory.push_back({x + vx * f, y + vy * f, width, height});
    return o;
}

std::vector<GrayImage> SyntheticVideo::gray_frames() const {
    std::vector<GrayImage> out;
    out.reserve(frames.size());
    for (const auto& f : frames) out.push_back(GrayImage::from_u8(width, height, f));
    return out;
}

MemoryFrameStore SyntheticVideo::frame_store() const {
    MemoryFrameStore store;
    store.add_video(video_id, gray_frames());
    return store;
}

SyntheticVideo generate(const SyntheticScenario& s) {
    validate(s);
    const int W = s.frame_width;
    const int H = s.frame_height;
    const int N = s.frame_count;
    const int n_obj = static_cast<int>(s.objects.size());

    SyntheticVideo out;
    out.video_id = s.video_id;
    out.width = W;
    out.height = H;

    // Frames.
    const Patch background = make_texture(W, H, 4, derive_seed(s.seed, 1));
    std::vector<Patch> occluders;
    for (std::size_t e = 0; e < s.occlusions.size(); ++e) {
        const auto& obj = s.objects[static_cast<std::size_t>(s.occlusions[e].object)];
        occluders.push_back(make_texture(obj.texture.width, obj.texture.height, 2, derive_seed(s.seed, 1000 + e)));
    }
    for (int f = 0; f < N; ++f) {
        std::vector<std::uint8_t> frame = background.levels;
        for (int o = 0; o < n_obj; ++o) {
            const auto& obj = s.objects[static_cast<std::size_t>(o)];
            const PixelRect& at = obj.trajectory[static_cast<std::size_t>(f)];
            const OcclusionEvent* occ = occlusion_at(s, o, f);
            paint(frame, W, occ ? occluders[static_cast<std::size_t>(occ - s.occlusions.data())] : obj.texture, at);
        }
        out.frames.push_back(std::move(frame));
    }

    // Detections of the true objects.
    Rng rng(derive_seed(s.seed, 2));
    const DetectorModel& det = s.detector;
    std::vector<TruthDetection> truth;
    std::vector<std::vector<bool>> detected(static_cast<std::size_t>(n_obj), std::vector<bool>(static_cast<std::size_t>(N)));
    for (int o = 0; o < n_obj; ++o) {
        for (int f = 0; f < N; ++f) {
            const bool random_miss = rng.bernoulli(det.miss_prob);
            const bool injected = std::any_of(s.misses.begin(), s.misses.end(),
                                              [&](const InjectedMiss& m) { return m.object == o && m.frame == f; });
            const OcclusionEvent* occ = occlusion_at(s, o, f);
            if ((occ && !occ->detected) || (!occ && (injected || random_miss))) continue;

            const PixelRect& r = s.objects[static_cast<std::size_t>(o)].trajectory[static_cast<std::size_t>(f)];
            BoundingBox box = to_box(r);
            if (det.jitter_sigma > 0.0) {
                box.x += det.jitter_sigma * rng.normal();
                box.y += det.jitter_sigma * rng.normal();
                box.w += 0.5 * det.jitter_sigma * rng.normal();
                box.h += 0.5 * det.jitter_sigma * rng.normal();
                box.x = std::clamp(box.x, 0.0, W - 2.0);
                box.y = std::clamp(box.y, 0.0, H - 2.0);
                box.w = std::clamp(box.w, 2.0, W - box.x);
                box.h = std::clamp(box.h, 2.0, H - box.y);
            }
            const double score = rng.uniform(det.true_score_min, det.true_score_max);
            detected[static_cast<std::size_t>(o)][static_cast<std::size_t>(f)] = true;
            truth.push_back({{s.video_id, f, box, score, s.category},
                             occ ? ExpectedLabel::Occluded : ExpectedLabel::PseudoPositive,
                             o});
        }
    }

    // Spurious single-frame flickers, clear of every object and of each other.
    std::vector<std::pair<int, PixelRect>> spurious;
    int min_size = W;
    int max_size = 1;
    for (const auto& obj : s.objects) {
        min_size = std::min({min_size, obj.texture.width, obj.texture.height});
        max_size = std::max({max_size, obj.texture.width, obj.texture.height});
    }
    if (s.objects.empty()) {
        min_size = 16;
        max_size = 24;
    }
    for (int k = 0; k < det.spurious_flicker_count; ++k) {
        bool placed = false;
        for (int attempt = 0; attempt < 5000 && !placed; ++attempt) {
            const int f = rng.uniform_int(1, N - 2);
            const int w = rng.uniform_int(min_size, max_size);
            const int h = rng.uniform_int(min_size, max_size);
            if (w >= W || h >= H) break;
            const PixelRect r{rng.uniform_int(0, W - w), rng.uniform_int(0, H - h), w, h};
            bool clear = true;
            for (int g = std::max(0, f - s.isolation_window); clear && g <= std::min(N - 1, f + s.isolation_window); ++g) {
                for (const auto& obj : s.objects) {
                    if (overlaps(r, obj.trajectory[static_cast<std::size_t>(g)], 2)) {
                        clear = false;
                        break;
                    }
                }
            }
            for (const auto& [g, other] : spurious) {
                if (std::abs(g - f) <= s.isolation_window && overlaps(r, other, 2)) clear = false;
            }
            if (!clear) continue;
            spurious.emplace_back(f, r);
            const double score = rng.uniform(det.spurious_score_min, det.spurious_score_max);
            truth.push_back({{s.video_id, f, to_box(r), score, s.category}, ExpectedLabel::HardNegative, -1});
            placed = true;
        }
        if (!placed) throw InvalidInput("cannot place spurious flicker " + std::to_string(k) + " clear of objects");
    }

    for (int k = 0; k < det.below_threshold_count; ++k) {
        const int f = rng.uniform_int(0, N - 1);
        const int w = rng.uniform_int(8, std::max(8, W / 4));
        const int h = rng.uniform_int(8, std::max(8, H / 4));
        const BoundingBox box{static_cast<double>(rng.uniform_int(0, W - w)),
                              static_cast<double>(rng.uniform_int(0, H - h)), static_cast<double>(w),
                              static_cast<double>(h)};
        truth.push_back({{s.video_id, f, box, rng.uniform(0.05, 0.7), s.category}, ExpectedLabel::BelowThreshold, -1});
    }

    std::stable_sort(truth.begin(), truth.end(), [](const TruthDetection& a, const TruthDetection& b) {
        return canonical_less(a.detection, b.detection);
    });

    // Single-frame dropouts flanked by detections.
    for (int o = 0; o < n_obj; ++o) {
        const auto& d = detected[static_cast<std::size_t>(o)];
        for (int g = 1; g + 1 < N; ++g) {
            const auto gi = static_cast<std::size_t>(g);
            if (d[gi] || !d[gi - 1] || !d[gi + 1]) continue;
            const TruthGap gap{g, to_box(s.objects[static_cast<std::size_t>(o)].trajectory[gi]), o};
            (occlusion_at(s, o, g) ? out.truth.occluded_gaps : out.truth.hard_positives).push_back(gap);
        }
    }
    std::stable_sort(out.truth.hard_positives.begin(), out.truth.hard_positives.end(),
                     [](const TruthGap& a, const TruthGap& b) { return a.frame_index < b.frame_index; });

    std::vector<DetectionRecord> records;
    for (const auto& t : truth) records.push_back(t.detection);
    out.stream = DetectionStream::from_records(std::move(records), {"flickermine-synth", s.category, ""});
    out.truth.detections = std::move(truth);
    return out;
}

SyntheticScenario make_scenario(const ScenarioParams& p) {
    Rng rng(derive_seed(p.seed, 3));
    SyntheticScenario s;
    s.video_id = p.video_id.empty() ? "synth_" + std::to_string(p.seed) : p.video_id;
    s.frame_width = p.frame_width;
    s.frame_height = p.frame_height;
    s.frame_count = p.frame_count;
    s.detector = p.detector;
    s.seed = derive_seed(p.seed, 4);
    const int N = p.frame_count;

    for (int i = 0; i < p.object_count; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < 5000 && !placed; ++attempt) {
            const int w = rng.uniform_int(p.min_object_size, p.max_object_size);
            const int h = rng.uniform_int(p.min_object_size, p.max_object_size);
            const int vx = rng.uniform_int(-p.max_speed, p.max_speed);
            const int vy = rng.uniform_int(-p.max_speed, p.max_speed);
            const int travel_x = vx * (N - 1);
            const int travel_y = vy * (N - 1);
            const int x_lo = std::max(0, -travel_x);
            const int x_hi = p.frame_width - w - std::max(0, travel_x);
            const int y_lo = std::max(0, -travel_y);
            const int y_hi = p.frame_height - h - std::max(0, travel_y);
            if (x_hi < x_lo || y_hi < y_lo) continue;
            SceneObject obj = make_linear_object(w, h, rng.uniform_int(x_lo, x_hi), rng.uniform_int(y_lo, y_hi), vx, vy,
                                                 N, derive_seed(p.seed, 100 + static_cast<std::uint64_t>(i)));
            bool clear = true;
            for (const auto& other : s.objects) {
                for (int f = 0; f < N && clear; ++f) {
                    clear = !overlaps(obj.trajectory[static_cast<std::size_t>(f)],
                                      other.trajectory[static_cast<std::size_t>(f)], 4);
                }
            }
            if (!clear) continue;
            s.objects.push_back(std::move(obj));
            placed = true;
        }
        if (!placed) throw InvalidInput("cannot place object " + std::to_string(i) + " without overlap");
    }

    // Per-object frames already claimed by an event (including the flanks of single-frame gaps).
    std::vector<std::vector<bool>> busy(s.objects.size(), std::vector<bool>(static_cast<std::size_t>(N), false));
    auto claim = [&](int o, int first, int last) {
        for (int f = std::max(0, first); f <= std::min(N - 1, last); ++f) {
            if (busy[static_cast<std::size_t>(o)][static_cast<std::size_t>(f)]) return false;
        }
        for (int f = std::max(0, first); f <= std::min(N - 1, last); ++f) {
            busy[static_cast<std::size_t>(o)][static_cast<std::size_t>(f)] = true;
        }
        return true;
    };
    auto place_events = [&](int count, auto&& try_one) {
        for (int k = 0; k < count && !s.objects.empty(); ++k) {
            for (int attempt = 0; attempt < 200; ++attempt) {
                if (try_one()) break;
            }
        }
    };
    const int n_obj = static_cast<int>(s.objects.size());
    if (N >= 3) {
        place_events(p.injected_misses, [&] {
            const int o = rng.uniform_int(0, n_obj - 1);
            const int g = rng.uniform_int(1, N - 2);
            if (!claim(o, g - 1, g + 1)) return false;
            s.misses.push_back({o, g});
            return true;
        });
        place_events(p.occluded_gaps, [&] {
            const int o = rng.uniform_int(0, n_obj - 1);
            const int g = rng.uniform_int(1, N - 2);
            if (!claim(o, g - 1, g + 1)) return false;
            s.occlusions.push_back({o, g, g, false});
            return true;
        });
        place_events(p.detected_occlusions, [&] {
            const int o = rng.uniform_int(0, n_obj - 1);
            const int len = rng.uniform_int(2, 3);
            const int a = rng.uniform_int(0, N - len);
            if (!claim(o, a, a + len - 1)) return false;
            s.occlusions.push_back({o, a, a + len - 1, true});
            return true;
        });
    }
    return s;
}

ScenarioParams injection_params(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 5));
    ScenarioParams p;
    p.seed = seed;
    p.frame_count = 24;
    p.object_count = rng.uniform_int(1, 3);
    p.injected_misses = rng.uniform_int(1, 2);
    p.occluded_gaps = rng.uniform_int(0, 1);
    p.detected_occlusions = rng.uniform_int(0, 1);
    p.detector.jitter_sigma = 0.0;
    p.detector.miss_prob = 0.0;
    p.detector.spurious_flicker_count = rng.uniform_int(1, 5);
    p.detector.below_threshold_count = rng.uniform_int(0, 2);
    return p;
}

ScenarioParams random_params(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 6));
    ScenarioParams p;
    p.seed = seed;
    p.frame_width = rng.uniform_int(128, 160);
    p.frame_height = rng.uniform_int(96, 120);
    p.frame_count = rng.uniform_int(16, 24);
    p.object_count = rng.uniform_int(1, 3);
    p.injected_misses = rng.uniform_int(0, 2);
    p.occluded_gaps = rng.uniform_int(0, 1);
    p.detected_occlusions = rng.uniform_int(0, 1);
    p.detector.jitter_sigma = rng.bernoulli(0.25) ? 0.0 : rng.uniform(0.3, 1.5);
    const double miss_choices[] = {0.0, 0.03, 0.08};
    p.detector.miss_prob = miss_choices[rng.uniform_int(0, 2)];
    p.detector.spurious_flicker_count = rng.uniform_int(0, 5);
    p.detector.below_threshold_count = rng.uniform_int(0, 3);
    p.detector.true_score_min = rng.bernoulli(0.5) ? 0.85 : 0.75;
    return p;
}

void write_video(const SyntheticVideo& video, const std::filesystem::path& dir) {
    const auto frame_dir = dir / "frames" / video.video_id;
    std::filesystem::create_directories(frame_dir);
    for (std::size_t f = 0; f < video.frames.size(); ++f) {
        write_gray_png(frame_dir / frame_file_name(static_cast<std::int64_t>(f)), video.width, video.height,
                       video.frames[f]);
    }
    {
        std::ofstream out(dir / "detections.jsonl", std::ios::binary);
        write_detection_stream(out, video.stream);
        if (!out) throw Error("cannot write " + (dir / "detections.jsonl").string());
    }
    std::ofstream out(dir / "ground_truth.jsonl", std::ios::binary);
    using ojson = nlohmann::ordered_json;
    auto box = [](const BoundingBox& b) { return ojson::array({b.x, b.y, b.w, b.h}); };
    for (const auto& t : video.truth.detections) {
        ojson j;
        j["kind"] = "detection";
        j["video"] = t.detection.video_id;
        j["frame"] = t.detection.frame_index;
        j["bbox"] = box(t.detection.box);
        j["score"] = t.detection.score;
        j["category"] = t.detection.category;
        j["expected"] = std::string(to_string(t.expected));
        j["object"] = t.object;
        out << j.dump() << '\n';
    }
    for (const auto* list : {&video.truth.hard_positives, &video.truth.occluded_gaps}) {
        for (const auto& g : *list) {
            ojson j;
            j["kind"] = list == &video.truth.hard_positives ? "hard_positive" : "occluded_gap";
            j["video"] = video.video_id;
            j["frame"] = g.frame_index;
            j["bbox"] = box(g.box);
            j["object"] = g.object;
            out << j.dump() << '\n';
        }
    }
    if (!out) throw Error("cannot write " + (dir / "ground_truth.jsonl").string());
}

}  // namespace flickermine::synth
