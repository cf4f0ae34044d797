#include "flickermine/export.hpp"

#include <algorithm>
#include <map>
#include <tuple>

#include <json.hpp>

#include "flickermine/errors.hpp"
#include "flickermine/geometry.hpp"

namespace flickermine {

using ojson = nlohmann::ordered_json;

std::string_view to_string(AnnotationSource source) noexcept {
    return source == AnnotationSource::HardPositive ? "hard_positive" : "pseudo_positive";
}

namespace {

auto box_key(const BoundingBox& b) { return std::tie(b.x, b.y, b.w, b.h); }

struct PendingAnnotation {
    BoundingBox box;
    AnnotationSource source;

    friend bool operator<(const PendingAnnotation& a, const PendingAnnotation& b) {
        return std::tuple_cat(box_key(a.box), std::tie(a.source)) < std::tuple_cat(box_key(b.box), std::tie(b.source));
    }
    friend bool operator==(const PendingAnnotation&, const PendingAnnotation&) = default;
};

struct PendingNegative {
    BoundingBox box;
    double score;

    friend bool operator<(const PendingNegative& a, const PendingNegative& b) {
        const double na = -a.score;
        const double nb = -b.score;
        return std::tuple_cat(box_key(a.box), std::tie(na)) < std::tuple_cat(box_key(b.box), std::tie(nb));
    }
};

struct PendingImage {
    bool hn_selected = false;
    bool hard_positive = false;
    std::vector<PendingAnnotation> annotations;
    std::vector<PendingNegative> negatives;
};

class CategoryTracker {
public:
    void see(const std::string& category) {
        if (!seen_) {
            category_ = category;
            seen_ = true;
        } else if (category != category_) {
            throw InvalidInput("mixed categories '" + category_ + "' and '" + category +
                               "'; filter the stream to one category");
        }
    }
    const std::string& category() const { return category_; }

private:
    bool seen_ = false;
    std::string category_;
};

}  // namespace

RetrainingSet build_retraining_set(std::span<const LabeledDetection> hn_labels, const HardPositiveResult& hp,
                                   const std::set<FrameKey>& hn_selection, const FrameSource& frames) {
    CategoryTracker category;
    std::map<FrameKey, std::vector<const LabeledDetection*>> labels_by_frame;
    for (const auto& l : hn_labels) {
        labels_by_frame[{l.detection.video_id, l.detection.frame_index}].push_back(&l);
    }

    std::map<FrameKey, PendingImage> pending;
    for (const auto& key : hn_selection) {
        auto it = labels_by_frame.find(key);
        if (it == labels_by_frame.end()) {
            throw InvalidInput("selected frame " + key.video_id + ":" + std::to_string(key.frame_index) +
                               " has no labeled detections");
        }
        PendingImage& img = pending[key];
        img.hn_selected = true;
        for (const auto* l : it->second) {
            if (l->label.kind == LabelKind::PseudoPositive) {
                category.see(l->detection.category);
                img.annotations.push_back({l->detection.box, AnnotationSource::PseudoPositive});
            } else if (l->label.kind == LabelKind::HardNegative) {
                category.see(l->detection.category);
                img.negatives.push_back({l->detection.box, l->detection.score});
            }
        }
    }

    std::map<std::pair<std::string, std::int64_t>, const Tracklet*> tracklets;
    std::map<FrameKey, std::vector<const DetectionRecord*>> members_by_frame;
    for (const auto& t : hp.tracklets) {
        tracklets[{t.video_id, t.id}] = &t;
        for (const auto& m : t.members) members_by_frame[{m.video_id, m.frame_index}].push_back(&m);
    }
    for (const auto& h : hp.hard_positives) {
        if (!tracklets.count({h.video_id, h.tracklet_id})) {
            throw InvalidInput("hard positive at " + h.video_id + ":" + std::to_string(h.frame_index) +
                               " references unknown tracklet " + std::to_string(h.tracklet_id));
        }
        category.see(h.flank_before.category);
        const FrameKey key{h.video_id, h.frame_index};
        PendingImage& img = pending[key];
        img.hard_positive = true;
        img.annotations.push_back({h.box, AnnotationSource::HardPositive});
        if (auto it = members_by_frame.find(key); it != members_by_frame.end()) {
            for (const auto* m : it->second) img.annotations.push_back({m->box, AnnotationSource::PseudoPositive});
        }
    }

    RetrainingSet set;
    set.category = category.category();
    for (auto& [key, img] : pending) {
        std::sort(img.annotations.begin(), img.annotations.end());
        img.annotations.erase(std::unique(img.annotations.begin(), img.annotations.end()), img.annotations.end());
        std::erase_if(img.negatives, [&](const PendingNegative& n) {
            return std::any_of(img.annotations.begin(), img.annotations.end(),
                               [&](const PendingAnnotation& a) { return iou(a.box, n.box) >= kDuplicateIou; });
        });
        std::sort(img.negatives.begin(), img.negatives.end());

        const bool has_pseudo_positive =
            std::any_of(img.annotations.begin(), img.annotations.end(),
                        [](const PendingAnnotation& a) { return a.source == AnnotationSource::PseudoPositive; });
        const bool hn_portion = img.hn_selected && has_pseudo_positive && !img.negatives.empty();
        if (!hn_portion && !img.hard_positive) continue;

        const FrameInfo info = frames.info(key.video_id, key.frame_index);
        const std::int64_t image_id = static_cast<std::int64_t>(set.images.size()) + 1;
        set.images.push_back({image_id, key.video_id, key.frame_index, info.width, info.height, info.relative_path});
        for (const auto& a : img.annotations) {
            set.annotations.push_back({static_cast<std::int64_t>(set.annotations.size()) + 1, image_id, a.box, a.source});
        }
        // A hard-positive frame that failed the selection rule carries no manifest entries.
        if (hn_portion) {
            for (const auto& n : img.negatives) {
                set.hard_negatives.push_back(
                    {static_cast<std::int64_t>(set.hard_negatives.size()) + 1, image_id, n.box, n.score});
            }
        }
    }
    return set;
}

namespace {

ojson box_json(const BoundingBox& b) { return ojson::array({b.x, b.y, b.w, b.h}); }

BoundingBox parse_box(const ojson& j) {
    if (!j.is_array() || j.size() != 4) throw ParseError("bbox must be [x,y,w,h]");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

}  // namespace

std::string serialize_annotations(const RetrainingSet& set) {
    ojson doc;
    ojson images = ojson::array();
    for (const auto& img : set.images) {
        ojson j;
        j["id"] = img.id;
        j["file_name"] = img.file_name;
        j["width"] = img.width;
        j["height"] = img.height;
        j["video"] = img.video_id;
        j["frame"] = img.frame_index;
        images.push_back(std::move(j));
    }
    ojson annotations = ojson::array();
    for (const auto& a : set.annotations) {
        ojson j;
        j["id"] = a.id;
        j["image_id"] = a.image_id;
        j["category_id"] = 1;
        j["bbox"] = box_json(a.box);
        j["area"] = a.box.area();
        j["iscrowd"] = 0;
        j["source"] = std::string(to_string(a.source));
        annotations.push_back(std::move(j));
    }
    ojson categories = ojson::array();
    if (!set.category.empty()) categories.push_back(ojson{{"id", 1}, {"name", set.category}});
    doc["images"] = std::move(images);
    doc["annotations"] = std::move(annotations);
    doc["categories"] = std::move(categories);
    return doc.dump(2) + "\n";
}

std::string serialize_hard_negatives(const RetrainingSet& set) {
    ojson doc;
    doc["category"] = set.category;
    ojson entries = ojson::array();
    for (const auto& n : set.hard_negatives) {
        ojson j;
        j["id"] = n.id;
        j["image_id"] = n.image_id;
        j["bbox"] = box_json(n.box);
        j["score"] = n.score;
        entries.push_back(std::move(j));
    }
    doc["hard_negatives"] = std::move(entries);
    return doc.dump(2) + "\n";
}

RetrainingSet parse_retraining_set(std::string_view annotations_json, std::string_view hard_negatives_json) {
    RetrainingSet set;
    try {
        const ojson ann = ojson::parse(annotations_json);
        const ojson neg = ojson::parse(hard_negatives_json);
        for (const auto& j : ann.at("images")) {
            set.images.push_back({j.at("id").get<std::int64_t>(), j.at("video").get<std::string>(),
                                  j.at("frame").get<std::int64_t>(), j.at("width").get<int>(),
                                  j.at("height").get<int>(), j.at("file_name").get<std::string>()});
        }
        for (const auto& j : ann.at("annotations")) {
            const std::string source = j.at("source").get<std::string>();
            if (source != "pseudo_positive" && source != "hard_positive") {
                throw ParseError("unknown annotation source '" + source + "'");
            }
            set.annotations.push_back({j.at("id").get<std::int64_t>(), j.at("image_id").get<std::int64_t>(),
                                       parse_box(j.at("bbox")),
                                       source == "hard_positive" ? AnnotationSource::HardPositive
                                                                 : AnnotationSource::PseudoPositive});
        }
        const auto& categories = ann.at("categories");
        if (categories.size() > 1) throw ParseError("expected at most one category");
        if (!categories.empty()) set.category = categories[0].at("name").get<std::string>();
        const std::string manifest_category = neg.at("category").get<std::string>();
        if (manifest_category != set.category) throw ParseError("manifest category differs from annotations");
        for (const auto& j : neg.at("hard_negatives")) {
            set.hard_negatives.push_back({j.at("id").get<std::int64_t>(), j.at("image_id").get<std::int64_t>(),
                                          parse_box(j.at("bbox")), j.at("score").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("malformed annotation document: ") + e.what());
    }
    return set;
}

std::vector<std::string> check_retraining_set(const RetrainingSet& set) {
    std::vector<std::string> problems;
    std::map<std::int64_t, const RetrainingImage*> images;
    for (const auto& img : set.images) {
        if (!images.emplace(img.id, &img).second) problems.push_back("duplicate image id " + std::to_string(img.id));
    }
    std::map<std::int64_t, std::vector<const RetrainingAnnotation*>> ann_by_image;
    for (const auto& a : set.annotations) {
        if (!images.count(a.image_id)) {
            problems.push_back("annotation " + std::to_string(a.id) + " references unknown image");
        }
        ann_by_image[a.image_id].push_back(&a);
    }
    std::set<std::int64_t> hn_images;
    for (const auto& n : set.hard_negatives) {
        if (!images.count(n.image_id)) {
            problems.push_back("hard negative " + std::to_string(n.id) + " references unknown image");
        }
        hn_images.insert(n.image_id);
        for (const auto* a : ann_by_image[n.image_id]) {
            if (iou(a->box, n.box) >= kDuplicateIou) {
                problems.push_back("hard negative " + std::to_string(n.id) + " duplicates annotation " +
                                   std::to_string(a->id));
            }
        }
    }
    for (const auto id : hn_images) {
        const auto& anns = ann_by_image[id];
        if (std::none_of(anns.begin(), anns.end(),
                         [](const auto* a) { return a->source == AnnotationSource::PseudoPositive; })) {
            problems.push_back("image " + std::to_string(id) + " has hard negatives but no pseudo-positive");
        }
    }
    return problems;
}

}  // namespace flickermine
