#include "flickermine/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "flickermine/errors.hpp"

namespace flickermine {

using nlohmann::json;

const FrameGroup* VideoDetections::find(std::int64_t frame_index) const noexcept {
    auto it = std::lower_bound(frames.begin(), frames.end(), frame_index,
                               [](const FrameGroup& g, std::int64_t f) { return g.frame_index < f; });
    return it != frames.end() && it->frame_index == frame_index ? &*it : nullptr;
}

std::size_t VideoDetections::detection_count() const noexcept {
    std::size_t n = 0;
    for (const auto& g : frames) n += g.records.size();
    return n;
}

DetectionStream DetectionStream::from_records(std::vector<DetectionRecord> records, StreamMetadata metadata) {
    std::map<std::string, std::vector<DetectionRecord>> by_video;
    for (auto& r : records) by_video[r.video_id].push_back(std::move(r));

    DetectionStream stream;
    stream.metadata = std::move(metadata);
    for (auto& [video_id, recs] : by_video) {
        std::stable_sort(recs.begin(), recs.end(), canonical_less);
        VideoDetections video;
        video.video_id = video_id;
        for (auto& r : recs) {
            if (video.frames.empty() || video.frames.back().frame_index != r.frame_index) {
                video.frames.push_back({r.frame_index, {}});
            }
            video.frames.back().records.push_back(std::move(r));
        }
        stream.videos.push_back(std::move(video));
    }
    return stream;
}

const VideoDetections* DetectionStream::find(std::string_view video_id) const noexcept {
    auto it = std::lower_bound(videos.begin(), videos.end(), video_id,
                               [](const VideoDetections& v, std::string_view id) { return v.video_id < id; });
    return it != videos.end() && it->video_id == video_id ? &*it : nullptr;
}

std::size_t DetectionStream::detection_count() const noexcept {
    std::size_t n = 0;
    for (const auto& v : videos) n += v.detection_count();
    return n;
}

std::vector<DetectionRecord> DetectionStream::records() const {
    std::vector<DetectionRecord> out;
    out.reserve(detection_count());
    for (const auto& v : videos)
        for (const auto& g : v.frames) out.insert(out.end(), g.records.begin(), g.records.end());
    return out;
}

namespace {

const json& field(const json& obj, const char* name, std::size_t line) {
    auto it = obj.find(name);
    if (it == obj.end()) throw ParseError(std::string("missing field '") + name + "'", line);
    return *it;
}

double number_field(const json& v, const char* name, std::size_t line) {
    if (!v.is_number()) throw ParseError(std::string("field '") + name + "' must be a number", line);
    return v.get<double>();
}

DetectionRecord parse_record(const json& obj, std::size_t line) {
    DetectionRecord rec;
    const json& video = field(obj, "video", line);
    if (!video.is_string()) throw ParseError("field 'video' must be a string", line);
    rec.video_id = video.get<std::string>();
    // Video ids name frame directories.
    if (rec.video_id.empty() || rec.video_id == "." || rec.video_id == ".." ||
        rec.video_id.find_first_of("/\\") != std::string::npos) {
        throw ParseError("field 'video' must be a non-empty name without path separators", line);
    }

    const json& frame = field(obj, "frame", line);
    if (!frame.is_number_integer()) throw ParseError("field 'frame' must be an integer", line);
    rec.frame_index = frame.get<std::int64_t>();
    if (rec.frame_index < 0) throw ParseError("field 'frame' must be >= 0", line);

    const json& bbox = field(obj, "bbox", line);
    if (!bbox.is_array() || bbox.size() != 4) throw ParseError("field 'bbox' must be [x,y,w,h]", line);
    rec.box = {number_field(bbox[0], "bbox", line), number_field(bbox[1], "bbox", line),
               number_field(bbox[2], "bbox", line), number_field(bbox[3], "bbox", line)};
    if (!(rec.box.w > 0.0 && rec.box.h > 0.0)) throw ParseError("bbox width and height must be positive", line);
    if (!(rec.box.x >= 0.0 && rec.box.y >= 0.0)) throw ParseError("bbox origin must be non-negative", line);
    if (!rec.box.is_valid()) throw ParseError("bbox fields must be finite", line);

    rec.score = number_field(field(obj, "score", line), "score", line);
    if (!(rec.score >= 0.0 && rec.score <= 1.0)) throw ParseError("score must be in [0,1]", line);

    const json& category = field(obj, "category", line);
    if (!category.is_string() || category.get<std::string>().empty()) {
        throw ParseError("field 'category' must be a non-empty string", line);
    }
    rec.category = category.get<std::string>();
    return rec;
}

StreamMetadata parse_metadata(const json& meta, std::size_t line) {
    if (!meta.is_object()) throw ParseError("field 'meta' must be an object", line);
    StreamMetadata out;
    auto str = [&](const char* key) -> std::string {
        auto it = meta.find(key);
        if (it == meta.end()) return {};
        if (!it->is_string()) throw ParseError(std::string("meta field '") + key + "' must be a string", line);
        return it->get<std::string>();
    };
    out.detector = str("detector");
    out.category = str("category");
    out.created = str("created");
    return out;
}

bool is_blank(std::string_view s) {
    return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace

DetectionStream parse_detection_stream(std::istream& input) {
    std::vector<DetectionRecord> records;
    StreamMetadata metadata;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(input, line)) {
        ++line_no;
        if (is_blank(line)) continue;
        json obj;
        try {
            obj = json::parse(line);
        } catch (const json::parse_error& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), line_no);
        }
        if (!obj.is_object()) throw ParseError("record must be a JSON object", line_no);
        if (auto meta = obj.find("meta"); meta != obj.end() && obj.find("video") == obj.end()) {
            metadata = parse_metadata(*meta, line_no);
            continue;
        }
        try {
            records.push_back(parse_record(obj, line_no));
        } catch (const json::exception& e) {
            throw ParseError(std::string("malformed record: ") + e.what(), line_no);
        }
    }
    return DetectionStream::from_records(std::move(records), std::move(metadata));
}

DetectionStream parse_detection_stream(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse_detection_stream(in);
}

void write_detection_stream(std::ostream& out, const DetectionStream& stream) {
    if (!stream.metadata.empty()) {
        json meta = json::object();
        meta["detector"] = stream.metadata.detector;
        meta["category"] = stream.metadata.category;
        meta["created"] = stream.metadata.created;
        out << json{{"meta", meta}}.dump() << '\n';
    }
    for (const auto& video : stream.videos) {
        for (const auto& group : video.frames) {
            for (const auto& r : group.records) {
                nlohmann::ordered_json line;
                line["video"] = r.video_id;
                line["frame"] = r.frame_index;
                line["bbox"] = {r.box.x, r.box.y, r.box.w, r.box.h};
                line["score"] = r.score;
                line["category"] = r.category;
                out << line.dump() << '\n';
            }
        }
    }
}

namespace {

template <typename Pred>
DetectionStream filter_records(const DetectionStream& stream, Pred keep) {
    DetectionStream out;
    out.metadata = stream.metadata;
    for (const auto& video : stream.videos) {
        VideoDetections v;
        v.video_id = video.video_id;
        for (const auto& group : video.frames) {
            FrameGroup g{group.frame_index, {}};
            std::copy_if(group.records.begin(), group.records.end(), std::back_inserter(g.records), keep);
            if (!g.records.empty()) v.frames.push_back(std::move(g));
        }
        if (!v.frames.empty()) out.videos.push_back(std::move(v));
    }
    return out;
}

}  // namespace

DetectionStream filter_by_score(const DetectionStream& stream, double threshold) {
    return filter_records(stream, [threshold](const DetectionRecord& r) { return r.score >= threshold; });
}

DetectionStream filter_by_category(const DetectionStream& stream, std::string_view category) {
    return filter_records(stream, [category](const DetectionRecord& r) { return r.category == category; });
}

}  // namespace flickermine
