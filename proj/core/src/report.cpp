#include "flickermine/report.hpp"

#include <istream>
#include <ostream>
#include <string>

#include <json.hpp>

#include "flickermine/errors.hpp"

namespace flickermine {

using ojson = nlohmann::ordered_json;

namespace {

ojson box_json(const BoundingBox& b) { return ojson::array({b.x, b.y, b.w, b.h}); }

BoundingBox parse_box(const ojson& j, std::size_t line) {
    if (!j.is_array() || j.size() != 4) throw ParseError("bbox must be [x,y,w,h]", line);
    for (const auto& v : j)
        if (!v.is_number()) throw ParseError("bbox entries must be numbers", line);
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
}

ojson member_json(const DetectionRecord& r) {
    ojson j;
    j["frame"] = r.frame_index;
    j["bbox"] = box_json(r.box);
    j["score"] = r.score;
    j["category"] = r.category;
    return j;
}

DetectionRecord parse_member(const ojson& j, const std::string& video, std::size_t line) {
    DetectionRecord r;
    r.video_id = video;
    r.frame_index = j.at("frame").get<std::int64_t>();
    r.box = parse_box(j.at("bbox"), line);
    r.score = j.at("score").get<double>();
    r.category = j.at("category").get<std::string>();
    return r;
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            fn(ojson::parse(text), line);
        } catch (const ParseError&) {
            throw;
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("malformed report line: ") + e.what(), line);
        }
    }
}

}  // namespace

void write_hn_report(std::ostream& out, std::span<const LabeledDetection> labels) {
    for (const auto& l : labels) {
        ojson j;
        j["kind"] = "detection";
        j["video"] = l.detection.video_id;
        j["frame"] = l.detection.frame_index;
        j["bbox"] = box_json(l.detection.box);
        j["score"] = l.detection.score;
        j["category"] = l.detection.category;
        j["label"] = std::string(to_string(l.label.kind));
        ojson evidence = ojson::array();
        for (const auto& ev : l.label.evidence) {
            ojson e;
            e["frame"] = ev.frame_index;
            e["status"] = std::string(to_string(ev.status));
            if (ev.ncc) e["ncc"] = *ev.ncc;
            if (ev.prediction) e["pred"] = box_json(ev.prediction->box);
            if (ev.max_iou) e["max_iou"] = *ev.max_iou;
            evidence.push_back(std::move(e));
        }
        j["evidence"] = std::move(evidence);
        out << j.dump() << '\n';
    }
}

std::vector<LabeledDetection> read_hn_report(std::istream& in) {
    std::vector<LabeledDetection> out;
    for_each_line(in, [&](const ojson& j, std::size_t line) {
        if (j.value("kind", "") != "detection") throw ParseError("expected a detection record", line);
        LabeledDetection l;
        l.detection = parse_member(j, j.at("video").get<std::string>(), line);
        const auto kind = label_kind_from_string(j.at("label").get<std::string>());
        if (!kind) throw ParseError("unknown label", line);
        l.label.kind = *kind;
        for (const auto& e : j.at("evidence")) {
            AdjacentEvidence ev;
            ev.frame_index = e.at("frame").get<std::int64_t>();
            const auto status = evidence_status_from_string(e.at("status").get<std::string>());
            if (!status) throw ParseError("unknown evidence status", line);
            ev.status = *status;
            if (e.contains("ncc")) ev.ncc = e["ncc"].get<double>();
            if (e.contains("pred")) {
                if (!ev.ncc) throw ParseError("prediction without ncc", line);
                ev.prediction = TrackletPrediction{parse_box(e["pred"], line), *ev.ncc};
            }
            if (e.contains("max_iou")) ev.max_iou = e["max_iou"].get<double>();
            l.label.evidence.push_back(std::move(ev));
        }
        out.push_back(std::move(l));
    });
    return out;
}

void write_hp_report(std::ostream& out, const HardPositiveResult& result) {
    for (const auto& t : result.tracklets) {
        ojson j;
        j["kind"] = "tracklet";
        j["video"] = t.video_id;
        j["id"] = t.id;
        j["gaps"] = t.gap_frames;
        ojson members = ojson::array();
        for (const auto& m : t.members) members.push_back(member_json(m));
        j["members"] = std::move(members);
        out << j.dump() << '\n';
    }
    for (const auto& hp : result.hard_positives) {
        ojson j;
        j["kind"] = "hard_positive";
        j["video"] = hp.video_id;
        j["frame"] = hp.frame_index;
        j["bbox"] = box_json(hp.box);
        j["tracklet"] = hp.tracklet_id;
        j["ncc"] = hp.ncc_confirm_score;
        j["flank_before"] = member_json(hp.flank_before);
        j["flank_after"] = member_json(hp.flank_after);
        out << j.dump() << '\n';
    }
}

HardPositiveResult read_hp_report(std::istream& in) {
    HardPositiveResult out;
    for_each_line(in, [&](const ojson& j, std::size_t line) {
        const std::string kind = j.value("kind", "");
        const std::string video = j.at("video").get<std::string>();
        if (kind == "tracklet") {
            Tracklet t;
            t.video_id = video;
            t.id = j.at("id").get<std::int64_t>();
            t.gap_frames = j.at("gaps").get<std::vector<std::int64_t>>();
            for (const auto& m : j.at("members")) t.members.push_back(parse_member(m, video, line));
            out.tracklets.push_back(std::move(t));
        } else if (kind == "hard_positive") {
            HardPositive hp;
            hp.video_id = video;
            hp.frame_index = j.at("frame").get<std::int64_t>();
            hp.box = parse_box(j.at("bbox"), line);
            hp.tracklet_id = j.at("tracklet").get<std::int64_t>();
            hp.ncc_confirm_score = j.at("ncc").get<double>();
            hp.flank_before = parse_member(j.at("flank_before"), video, line);
            hp.flank_after = parse_member(j.at("flank_after"), video, line);
            out.hard_positives.push_back(std::move(hp));
        } else {
            throw ParseError("expected a tracklet or hard_positive record", line);
        }
    });
    return out;
}

}  // namespace flickermine
