#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <unistd.h>

#include <CLI11.hpp>
#include <json.hpp>
#include <openssl/evp.h>

#include "flickermine/audit.hpp"
#include "flickermine/errors.hpp"
#include "flickermine/export.hpp"
#include "flickermine/frame_store.hpp"
#include "flickermine/hn_miner.hpp"
#include "flickermine/hp_miner.hpp"
#include "flickermine/ingest.hpp"
#include "flickermine/report.hpp"
#include "flickermine/synth.hpp"
#include "flickermine/version.hpp"

namespace flickermine::cli {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::string read_file(const fs::path& path, std::string_view what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + std::string(what) + ": " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

unsigned default_workers() { return std::max(1u, std::thread::hardware_concurrency()); }

/// Digest of the sorted (relative path, size) listing of a frame directory.
std::string directory_listing_digest(const fs::path& root) {
    std::vector<std::string> lines;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        lines.push_back(fs::relative(entry.path(), root).generic_string() + '\t' + std::to_string(entry.file_size()));
    }
    std::sort(lines.begin(), lines.end());
    std::string joined;
    for (const auto& l : lines) joined += l + '\n';
    return sha256_hex(joined);
}

struct RunManifest {
    std::string command;
    std::vector<std::string> argv;
    std::optional<MiningConfig> config;
    ojson inputs = ojson::array();
    std::vector<std::string> outputs;
    std::string started = utc_now();

    void add_file(const std::string& role, const fs::path& path) {
        inputs.push_back({{"role", role}, {"path", path.string()}, {"sha256", sha256_file(path)}});
    }
    void add_directory(const std::string& role, const fs::path& path) {
        inputs.push_back({{"role", role}, {"path", path.string()}, {"listing_sha256", directory_listing_digest(path)}});
    }

    std::string json() const {
        ojson j;
        j["tool"] = "flickermine";
        j["version"] = kVersion;
        j["command"] = command;
        j["argv"] = argv;
        if (config) {
            ojson c = ojson::object();
            for (const auto& [k, v] : config_entries(*config)) c[k] = v;
            j["config"] = c;
        }
        j["inputs"] = inputs;
        j["outputs"] = outputs;
        j["started"] = started;
        j["finished"] = utc_now();
        return j.dump(2) + "\n";
    }
};

/// Output directory assembled in a hidden sibling and moved into place on commit.
class StagingDir {
public:
    explicit StagingDir(fs::path target) : target_(fs::absolute(std::move(target))) {
        staging_ = target_.parent_path() / ("." + target_.filename().string() + ".partial-" + std::to_string(::getpid()));
        fs::remove_all(staging_);
        fs::create_directories(staging_);
    }
    StagingDir(const StagingDir&) = delete;
    StagingDir& operator=(const StagingDir&) = delete;
    ~StagingDir() {
        std::error_code ec;
        fs::remove_all(staging_, ec);
    }

    const fs::path& path() const noexcept { return staging_; }

    void commit() {
        fs::create_directories(target_);
        for (const auto& entry : fs::directory_iterator(staging_)) {
            const fs::path dest = target_ / entry.path().filename();
            fs::remove_all(dest);
            fs::rename(entry.path(), dest);
        }
    }

private:
    fs::path target_;
    fs::path staging_;
};

struct ConfigOptions {
    std::string config_path;
    std::vector<std::pair<std::string, std::string>> overrides;
};

void add_config_options(CLI::App* cmd, ConfigOptions& opts) {
    cmd->add_option("--config", opts.config_path, "key=value config file (default: $FLICKERMINE_CONFIG)");
    for (const auto& [key, value] : config_entries(MiningConfig{})) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        const std::string k = key;
        cmd->add_option_function<std::string>(
               flag, [&opts, k](const std::string& v) { opts.overrides.emplace_back(k, v); }, "default " + value)
            ->type_name("VALUE");
    }
}

MiningConfig resolve_config(const ConfigOptions& opts) {
    MiningConfig cfg;
    std::string path = opts.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("FLICKERMINE_CONFIG"); env && *env) path = env;
    }
    if (!path.empty()) apply_config_file(cfg, path);
    for (const auto& [k, v] : opts.overrides) {
        try {
            apply_config_setting(cfg, k, v);
        } catch (const ConfigError& e) {
            throw ConfigError("--" + k + ": " + e.what());
        }
    }
    validate_config(cfg);
    return cfg;
}

DetectionStream load_stream(const fs::path& path, const std::string& category) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open detections file: " + path.string());
    DetectionStream stream;
    try {
        stream = parse_detection_stream(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
    return category.empty() ? stream : filter_by_category(stream, category);
}

std::vector<LabeledDetection> load_hn_report(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open hard-negative report: " + path.string());
    try {
        return read_hn_report(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

HardPositiveResult load_hp_report(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open hard-positive report: " + path.string());
    try {
        return read_hp_report(in);
    } catch (const ParseError& e) {
        throw ParseError(path.string() + ": " + e.what(), e.line());
    }
}

fs::path manifest_path_for(const fs::path& out) { return fs::path(out.string() + ".manifest.json"); }

void require_parent(const fs::path& out) {
    const fs::path parent = fs::absolute(out).parent_path();
    if (!fs::is_directory(parent)) throw Error("output directory does not exist: " + parent.string());
}

}  // namespace

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256 computation failed");
    }
    std::ostringstream ss;
    for (unsigned i = 0; i < len; ++i) ss << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(digest[i]);
    return ss.str();
}

std::string sha256_file(const fs::path& path) { return sha256_hex(read_file(path, "input file")); }

void write_file_atomic(const fs::path& path, std::string_view contents) {
    const fs::path tmp = fs::path(path.string() + ".tmp-" + std::to_string(::getpid()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write output file: " + path.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            fs::remove(tmp, ec);
            throw Error("cannot write output file: " + path.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw Error("cannot move output into place: " + path.string());
    }
}

void apply_config_file(MiningConfig& cfg, const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        const std::string where = path.string() + ":" + std::to_string(n) + ": ";
        if (eq == std::string::npos) throw ConfigError(where + "expected key=value");
        std::string key = trim(std::string_view(body).substr(0, eq));
        std::replace(key.begin(), key.end(), '-', '_');
        try {
            apply_config_setting(cfg, key, trim(std::string_view(body).substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(where + e.what());
        }
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Mine hard negatives and hard positives from detector flickers in video."};
    app.name("flickermine");
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    unsigned workers = default_workers();
    std::string category;

    // mine-hn
    ConfigOptions hn_cfg;
    std::string hn_detections, hn_frames, hn_out;
    auto* mine_hn = app.add_subcommand("mine-hn", "Label thresholded detections as hard negative, pseudo-positive or unverified");
    mine_hn->add_option("--detections", hn_detections, "detection stream (JSONL)")->required();
    mine_hn->add_option("--frames", hn_frames, "frames root: <root>/<video>/<%08d>.png")->required();
    mine_hn->add_option("--out", hn_out, "report file (JSONL)")->required();
    mine_hn->add_option("--category", category, "keep only this category");
    mine_hn->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    add_config_options(mine_hn, hn_cfg);

    // mine-hp
    ConfigOptions hp_cfg;
    std::string hp_detections, hp_frames, hp_out;
    auto* mine_hp = app.add_subcommand("mine-hp", "Link tracklets and confirm single-frame gaps as hard positives");
    mine_hp->add_option("--detections", hp_detections, "detection stream (JSONL)")->required();
    mine_hp->add_option("--frames", hp_frames, "frames root")->required();
    mine_hp->add_option("--out", hp_out, "report file (JSONL)")->required();
    mine_hp->add_option("--category", category, "keep only this category");
    mine_hp->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    add_config_options(mine_hp, hp_cfg);

    // export
    ConfigOptions ex_cfg;
    std::string ex_hn, ex_hp, ex_frames, ex_out;
    auto* exp = app.add_subcommand("export", "Write retrain_set.json and hard_negatives.json");
    exp->add_option("--hn-report", ex_hn, "report from mine-hn")->required();
    exp->add_option("--hp-report", ex_hp, "report from mine-hp")->required();
    exp->add_option("--frames", ex_frames, "frames root")->required();
    exp->add_option("--out-dir", ex_out, "output directory")->required();
    add_config_options(exp, ex_cfg);

    // audit-sample
    std::string as_report, as_source = "hard_negative", as_frames, as_out;
    std::size_t as_n = 0;
    std::uint64_t as_seed = 1;
    auto* audit_sample = app.add_subcommand("audit-sample", "Draw a seeded sample of mined boxes and write crops for review");
    audit_sample->add_option("--report", as_report, "report from mine-hn or mine-hp")->required();
    audit_sample->add_option("--source", as_source, "hard_negative or hard_positive")
        ->check(CLI::IsMember({"hard_negative", "hard_positive"}))
        ->capture_default_str();
    audit_sample->add_option("--n", as_n, "sample size")->required();
    audit_sample->add_option("--seed", as_seed, "sampling seed")->capture_default_str();
    audit_sample->add_option("--frames", as_frames, "frames root")->required();
    audit_sample->add_option("--out-dir", as_out, "output directory for crops/ and manifest.tsv")->required();

    // audit-report
    std::string ar_manifest, ar_out;
    auto* audit_report = app.add_subcommand("audit-report", "Compute purity from a labeled audit manifest");
    audit_report->add_option("--manifest", ar_manifest, "manifest.tsv with the label column filled in")->required();
    audit_report->add_option("--out", ar_out, "report JSON (default: standard output)");

    // synth
    std::uint64_t sy_seed = 1;
    std::string sy_profile = "injection", sy_out, sy_video;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic video, detections and ground truth");
    synth_cmd->add_option("--seed", sy_seed, "scenario seed")->capture_default_str();
    synth_cmd->add_option("--profile", sy_profile, "injection (noise-free) or random (jitter and misses)")
        ->check(CLI::IsMember({"injection", "random"}))
        ->capture_default_str();
    synth_cmd->add_option("--video-id", sy_video, "video id (default synth_<seed>)");
    synth_cmd->add_option("--out-dir", sy_out, "output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    RunManifest manifest;
    manifest.argv = args;
    try {
        if (mine_hn->parsed()) {
            const MiningConfig cfg = resolve_config(hn_cfg);
            manifest.command = "mine-hn";
            manifest.config = cfg;
            const DetectionStream stream = load_stream(hn_detections, category);
            const DirectoryFrameStore frames(hn_frames);
            require_parent(hn_out);
            const auto labels = mine_stream(filter_by_score(stream, cfg.score_threshold), frames, cfg, workers);
            std::ostringstream report;
            write_hn_report(report, labels);
            manifest.add_file("detections", hn_detections);
            manifest.add_directory("frames", hn_frames);
            manifest.outputs = {hn_out};
            write_file_atomic(hn_out, report.str());
            write_file_atomic(manifest_path_for(hn_out), manifest.json());
            std::map<LabelKind, std::size_t> counts;
            for (const auto& l : labels) ++counts[l.label.kind];
            out << labels.size() << " detections: " << counts[LabelKind::HardNegative] << " hard_negative, "
                << counts[LabelKind::PseudoPositive] << " pseudo_positive, " << counts[LabelKind::Unverified]
                << " unverified\n";
        } else if (mine_hp->parsed()) {
            const MiningConfig cfg = resolve_config(hp_cfg);
            manifest.command = "mine-hp";
            manifest.config = cfg;
            const DetectionStream stream = load_stream(hp_detections, category);
            const DirectoryFrameStore frames(hp_frames);
            require_parent(hp_out);
            const auto result = mine_hard_positives(filter_by_score(stream, cfg.score_threshold), frames, cfg, workers);
            std::ostringstream report;
            write_hp_report(report, result);
            manifest.add_file("detections", hp_detections);
            manifest.add_directory("frames", hp_frames);
            manifest.outputs = {hp_out};
            write_file_atomic(hp_out, report.str());
            write_file_atomic(manifest_path_for(hp_out), manifest.json());
            out << result.tracklets.size() << " tracklets, " << result.hard_positives.size() << " hard positives\n";
        } else if (exp->parsed()) {
            const MiningConfig cfg = resolve_config(ex_cfg);
            manifest.command = "export";
            manifest.config = cfg;
            const auto labels = load_hn_report(ex_hn);
            const auto hp = load_hp_report(ex_hp);
            const DirectoryFrameStore frames(ex_frames);
            const RetrainingSet set = build_retraining_set(labels, hp, select_hn_frames(labels), frames);
            if (const auto problems = check_retraining_set(set); !problems.empty()) {
                throw Error("retraining set is inconsistent: " + problems.front());
            }
            manifest.add_file("hn_report", ex_hn);
            manifest.add_file("hp_report", ex_hp);
            manifest.add_directory("frames", ex_frames);
            manifest.outputs = {"retrain_set.json", "hard_negatives.json"};
            StagingDir staging(ex_out);
            write_file_atomic(staging.path() / "retrain_set.json", serialize_annotations(set));
            write_file_atomic(staging.path() / "hard_negatives.json", serialize_hard_negatives(set));
            write_file_atomic(staging.path() / "run_manifest.json", manifest.json());
            staging.commit();
            out << set.images.size() << " images, " << set.annotations.size() << " annotations, "
                << set.hard_negatives.size() << " hard negatives\n";
        } else if (audit_sample->parsed()) {
            manifest.command = "audit-sample";
            std::vector<DetectionRecord> population;
            if (as_source == "hard_negative") {
                for (const auto& l : load_hn_report(as_report))
                    if (l.label.kind == LabelKind::HardNegative) population.push_back(l.detection);
            } else {
                for (const auto& hp : load_hp_report(as_report).hard_positives) {
                    population.push_back({hp.video_id, hp.frame_index, hp.box, hp.ncc_confirm_score, hp.flank_before.category});
                }
            }
            const DirectoryFrameStore frames(as_frames);
            const AuditSample sample = sample_for_audit(population, as_n, as_seed);
            manifest.add_file("report", as_report);
            manifest.add_directory("frames", as_frames);
            manifest.outputs = {"crops/", "manifest.tsv"};
            StagingDir staging(as_out);
            write_audit_crops(sample, frames, staging.path());
            std::ostringstream tsv;
            write_audit_manifest(tsv, sample);
            write_file_atomic(staging.path() / "manifest.tsv", tsv.str());
            write_file_atomic(staging.path() / "run_manifest.json", manifest.json());
            staging.commit();
            out << sample.items.size() << " of " << sample.population << " " << as_source << " boxes sampled\n";
        } else if (audit_report->parsed()) {
            manifest.command = "audit-report";
            std::ifstream in(ar_manifest, std::ios::binary);
            if (!in) throw Error("cannot open audit manifest: " + ar_manifest);
            AuditSample sample;
            try {
                sample = parse_audit_manifest(in);
            } catch (const ParseError& e) {
                throw ParseError(ar_manifest + ": " + e.what(), e.line());
            }
            AuditReport report;
            try {
                report = compute_purity(sample.items);
            } catch (const ParseError& e) {
                throw ParseError(ar_manifest + ": " + e.what(), e.line());
            }
            const std::string json = audit_report_json(report);
            if (ar_out.empty()) {
                out << json;
            } else {
                require_parent(ar_out);
                manifest.add_file("manifest", ar_manifest);
                manifest.outputs = {ar_out};
                write_file_atomic(ar_out, json);
                write_file_atomic(manifest_path_for(ar_out), manifest.json());
            }
        } else if (synth_cmd->parsed()) {
            manifest.command = "synth";
            auto params = sy_profile == "injection" ? synth::injection_params(sy_seed) : synth::random_params(sy_seed);
            if (!sy_video.empty()) params.video_id = sy_video;
            const auto video = synth::generate(synth::make_scenario(params));
            manifest.outputs = {"frames/", "detections.jsonl", "ground_truth.jsonl"};
            StagingDir staging(sy_out);
            synth::write_video(video, staging.path());
            write_file_atomic(staging.path() / "run_manifest.json", manifest.json());
            staging.commit();
            out << "video " << video.video_id << ": " << video.frames.size() << " frames, "
                << video.stream.detection_count() << " detections\n";
        }
    } catch (const ConfigError& e) {
        err << "flickermine: config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "flickermine: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

}  // namespace flickermine::cli
