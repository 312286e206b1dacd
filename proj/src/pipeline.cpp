#include "mtmct/pipeline.hpp"

#include "mtmct/io.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <functional>
#include <future>
#include <map>
#include <set>
#include <sstream>

namespace mtmct {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (const auto& [key, value] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError("config: unknown key '" + where + "." + key + "'");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& target) {
    if (obj.contains(key)) target = obj.at(key).get<T>();
}

void read_path(const json& obj, const char* key, fs::path& target, const fs::path& base) {
    if (!obj.contains(key)) return;
    fs::path p = obj.at(key).get<std::string>();
    target = p.empty() || p.is_absolute() || base.empty() ? p : base / p;
}

std::string sha256_hex(const std::vector<std::string>& parts) {
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    if (ctx == nullptr) throw Error("sha256: cannot allocate digest context");
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    for (const auto& part : parts) {
        const std::uint64_t size = part.size();
        EVP_DigestUpdate(ctx, &size, sizeof size);
        EVP_DigestUpdate(ctx, part.data(), part.size());
    }
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, digest, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += hex[digest[i] >> 4];
        out += hex[digest[i] & 0xf];
    }
    return out;
}

json sct_json(const SctConfig& c) {
    return {{"nms_iou", c.nms_iou},
            {"min_confidence", c.min_confidence},
            {"min_area", c.min_area},
            {"gate", c.gate},
            {"feature_ema", c.feature_ema},
            {"max_age", c.max_age},
            {"min_length", c.min_length},
            {"appearance_max_cost", c.appearance_max_cost},
            {"iou_max_cost", c.iou_max_cost}};
}

// Runs `body` as stage `name`; any failure is reported under that name.
template <typename F>
auto stage(const std::string& name, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        throw StageError(name, e.what());
    }
}

// Files written during one run; removed again if the run fails.
class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}
    ~OutputSet() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
    }
    fs::path add(const std::string& name) {
        fs::create_directories(dir_);
        written_.push_back(dir_ / name);
        return written_.back();
    }
    void commit() { committed_ = true; }

private:
    fs::path dir_;
    std::vector<fs::path> written_;
    bool committed_ = false;
};

void require_file(const fs::path& p, const std::string& what) {
    if (p.empty()) throw ConfigError("config: missing path '" + what + "'");
    if (!fs::exists(p)) throw ConfigError("config: " + what + " file not found: " + p.string());
}

}  // namespace

StageError::StageError(std::string stage, const std::string& cause)
    : Error("stage " + stage + ": " + cause), stage_(std::move(stage)) {}

PipelineConfig pipeline_config_from_json(const std::string& text, const fs::path& base_dir) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    PipelineConfig c;
    try {
        reject_unknown(doc, {"paths", "feature_dim", "sct", "affinity", "scac", "cluster_threshold", "eval", "cache",
                             "flags"},
                       "config");
        if (doc.contains("paths")) {
            const auto& p = doc.at("paths");
            reject_unknown(p, {"detections", "features", "zones", "topology", "gt", "output"}, "paths");
            read_path(p, "detections", c.paths.detections, base_dir);
            read_path(p, "features", c.paths.features, base_dir);
            read_path(p, "zones", c.paths.zones, base_dir);
            read_path(p, "topology", c.paths.topology, base_dir);
            read_path(p, "gt", c.paths.gt, base_dir);
            read_path(p, "output", c.paths.output, base_dir);
        }
        read(doc, "feature_dim", c.feature_dim);
        if (doc.contains("sct")) {
            const auto& s = doc.at("sct");
            reject_unknown(s, {"nms_iou", "min_confidence", "min_area", "gate", "feature_ema", "max_age", "min_length",
                               "appearance_max_cost", "iou_max_cost"},
                           "sct");
            read(s, "nms_iou", c.sct.nms_iou);
            read(s, "min_confidence", c.sct.min_confidence);
            read(s, "min_area", c.sct.min_area);
            read(s, "gate", c.sct.gate);
            read(s, "feature_ema", c.sct.feature_ema);
            read(s, "max_age", c.sct.max_age);
            read(s, "min_length", c.sct.min_length);
            read(s, "appearance_max_cost", c.sct.appearance_max_cost);
            read(s, "iou_max_cost", c.sct.iou_max_cost);
        }
        if (doc.contains("affinity")) {
            const auto& a = doc.at("affinity");
            reject_unknown(a, {"bias_normalize", "neighbor_k", "k1", "k2", "lambda"}, "affinity");
            read(a, "bias_normalize", c.affinity.bias_normalize);
            read(a, "neighbor_k", c.affinity.neighbor_k);
            read(a, "k1", c.affinity.rerank.k1);
            read(a, "k2", c.affinity.rerank.k2);
            read(a, "lambda", c.affinity.rerank.lambda);
        }
        if (doc.contains("scac")) {
            const auto& s = doc.at("scac");
            reject_unknown(s, {"inter_zone_threshold", "inter_cam_threshold", "include_single_camera"}, "scac");
            read(s, "inter_zone_threshold", c.scac.inter_zone_threshold);
            read(s, "inter_cam_threshold", c.scac.inter_cam_threshold);
            read(s, "include_single_camera", c.scac.include_single_camera);
        }
        read(doc, "cluster_threshold", c.cluster_threshold);
        if (doc.contains("eval")) {
            const auto& e = doc.at("eval");
            reject_unknown(e, {"iou", "multi_cam_gt_only"}, "eval");
            read(e, "iou", c.eval_iou);
            read(e, "multi_cam_gt_only", c.multi_cam_gt_only);
        }
        read(doc, "cache", c.cache);
        if (doc.contains("flags")) {
            const auto& f = doc.at("flags");
            reject_unknown(f, {"tfs", "dbtm", "rerank", "scac"}, "flags");
            read(f, "tfs", c.flags.tfs);
            read(f, "dbtm", c.flags.dbtm);
            read(f, "rerank", c.flags.rerank);
            read(f, "scac", c.flags.scac);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (c.affinity.rerank.lambda < 0.0 || c.affinity.rerank.lambda > 1.0) {
        throw ConfigError("config: affinity.lambda must be in [0,1]");
    }
    if (c.eval_iou <= 0.0 || c.eval_iou > 1.0) throw ConfigError("config: eval.iou must be in (0,1]");
    return c;
}

PipelineConfig load_pipeline_config(const fs::path& path) {
    return pipeline_config_from_json(read_text_file(path), path.parent_path());
}

std::string pipeline_config_to_json(const PipelineConfig& c) {
    json doc;
    doc["paths"] = {{"detections", c.paths.detections.string()}, {"features", c.paths.features.string()},
                    {"zones", c.paths.zones.string()},           {"topology", c.paths.topology.string()},
                    {"gt", c.paths.gt.string()},                 {"output", c.paths.output.string()}};
    doc["feature_dim"] = c.feature_dim;
    doc["sct"] = sct_json(c.sct);
    doc["affinity"] = {{"bias_normalize", c.affinity.bias_normalize},
                       {"neighbor_k", c.affinity.neighbor_k},
                       {"k1", c.affinity.rerank.k1},
                       {"k2", c.affinity.rerank.k2},
                       {"lambda", c.affinity.rerank.lambda}};
    doc["scac"] = {{"inter_zone_threshold", c.scac.inter_zone_threshold},
                   {"inter_cam_threshold", c.scac.inter_cam_threshold},
                   {"include_single_camera", c.scac.include_single_camera}};
    doc["cluster_threshold"] = c.cluster_threshold;
    doc["eval"] = {{"iou", c.eval_iou}, {"multi_cam_gt_only", c.multi_cam_gt_only}};
    doc["cache"] = c.cache;
    doc["flags"] = {{"tfs", c.flags.tfs}, {"dbtm", c.flags.dbtm}, {"rerank", c.flags.rerank}, {"scac", c.flags.scac}};
    return doc.dump(2);
}

PipelineConfig config_for_world(const fs::path& world_dir, const fs::path& out_dir) {
    PipelineConfig c;
    c.paths.detections = world_dir / "detections.txt";
    c.paths.features = world_dir / "features.txt";
    c.paths.zones = world_dir / "zones.json";
    c.paths.topology = world_dir / "topology.json";
    c.paths.gt = world_dir / "gt.txt";
    c.paths.output = out_dir;
    return c;
}

Inputs load_inputs(const PipelineConfig& config) {
    const auto& p = config.paths;
    require_file(p.detections, "detections");
    require_file(p.features, "features");
    require_file(p.zones, "zones");
    require_file(p.topology, "topology");
    if (!p.gt.empty()) require_file(p.gt, "gt");
    return stage("ingest", [&] {
        Inputs in;
        in.detections = parse_detections(p.detections, p.features, config.feature_dim);
        in.zones = parse_zone_map(p.zones);
        in.topology = parse_topology(p.topology);
        if (!p.gt.empty()) in.gt = parse_submission(p.gt);
        return in;
    });
}

std::vector<Tracklet> run_sct(const Inputs& inputs, const PipelineConfig& config) {
    return stage("sct", [&] {
        fs::path cache_file;
        if (config.cache) {
            const std::string key = sha256_hex({read_text_file(config.paths.detections),
                                                read_text_file(config.paths.features),
                                                sct_json(config.sct).dump()});
            cache_file = config.paths.output / "cache" / ("sct-" + key + ".jsonl");
            if (fs::exists(cache_file)) return read_tracklets(cache_file, inputs.detections);
        }

        std::map<int, std::vector<Detection>> per_camera;
        for (int cam : inputs.topology.cameras()) per_camera[cam];
        for (const auto& d : inputs.detections) {
            if (!inputs.topology.contains(d.camera_id)) {
                throw ConfigError("detection row " + std::to_string(d.row + 1) + " has camera " +
                                  std::to_string(d.camera_id) + " which is not in the topology");
            }
            per_camera[d.camera_id].push_back(d);
        }
        std::vector<std::future<std::vector<Tracklet>>> jobs;
        for (int cam : inputs.topology.cameras()) {
            jobs.push_back(std::async(std::launch::async, [&, cam] { return track_camera(per_camera.at(cam), config.sct); }));
        }
        std::vector<Tracklet> out;
        for (auto& job : jobs) {
            auto part = job.get();
            std::move(part.begin(), part.end(), std::back_inserter(out));
        }
        if (config.cache) {
            fs::create_directories(cache_file.parent_path());
            const fs::path tmp = cache_file.string() + ".tmp";
            write_tracklets(out, tmp);
            fs::rename(tmp, cache_file);
        }
        return out;
    });
}

MtmctResult run_mtmct(std::vector<Tracklet> tracklets, const Inputs& inputs, const PipelineConfig& config) {
    MtmctResult r;
    stage("zones", [&] {
        assign_endpoints(tracklets, inputs.zones);
        r.tracklets = config.flags.tfs ? tfs_filter(tracklets) : std::move(tracklets);
        r.mask = config.flags.dbtm ? build_dbtm(r.tracklets, inputs.topology) : unit_mask(r.tracklets.size());
    });
    stage("affinity", [&] { r.affinity = compute_affinity(r.tracklets, r.mask, config.affinity, config.flags.rerank); });
    stage("scac", [&] {
        UnitSimilarity unit_similarity;
        if (config.flags.rerank) {
            const RerankParams params = config.affinity.rerank;
            unit_similarity = [params](const Eigen::MatrixXd& f) { return rerank(f, params); };
        } else {
            unit_similarity = [](const Eigen::MatrixXd& f) { return similarity_matrix(f); };
        }
        const ScacInput input{r.tracklets, inputs.topology, r.affinity.features, r.affinity.masked, r.mask,
                              unit_similarity};
        r.graph = MatchGraph(r.tracklets.size());
        const auto partition = config.flags.scac ? run_scac(input, config.scac, r.graph)
                                                 : global_cluster(input, config.cluster_threshold, r.graph);
        r.trajectories = assign_global_ids(partition, r.tracklets, config.scac.include_single_camera);
    });
    return r;
}

PipelineResult run_pipeline(const PipelineConfig& config) {
    const Inputs inputs = load_inputs(config);
    OutputSet outputs(config.paths.output);
    PipelineResult result;

    auto tracklets = run_sct(inputs, config);
    stage("sct", [&] { write_tracklets(tracklets, outputs.add("tracklets.jsonl")); });
    result.tracklet_count = tracklets.size();

    const auto mtmct = run_mtmct(std::move(tracklets), inputs, config);
    stage("scac", [&] {
        write_merge_log(mtmct.graph, mtmct.tracklets, outputs.add("merges.jsonl"));
        result.submission = to_submission_rows(mtmct.trajectories);
        write_submission(result.submission, outputs.add("submission.txt"));
    });
    if (inputs.gt) {
        stage("eval", [&] {
            result.report = evaluate(*inputs.gt, result.submission, config.eval_iou, config.multi_cam_gt_only);
            write_text_file(outputs.add("report.json"), report_json(*result.report) + "\n");
        });
    }
    outputs.commit();
    return result;
}

std::vector<AblationRow> run_ablation(const PipelineConfig& config) {
    const Inputs inputs = load_inputs(config);
    if (!inputs.gt) throw StageError("eval", "ablation needs a ground-truth file");
    OutputSet outputs(config.paths.output);
    const auto tracklets = run_sct(inputs, config);

    const std::vector<std::pair<std::string, AblationFlags>> steps = {
        {"baseline", {false, false, false, false}},
        {"+TFS", {true, false, false, false}},
        {"+DBTM", {true, true, false, false}},
        {"+Rerank", {true, true, true, false}},
        {"+SCAC", {true, true, true, true}},
    };
    std::vector<AblationRow> rows;
    for (const auto& [name, flags] : steps) {
        PipelineConfig c = config;
        c.flags = flags;
        const auto mtmct = run_mtmct(tracklets, inputs, c);
        const auto submission = to_submission_rows(mtmct.trajectories);
        auto report = stage("eval", [&] { return evaluate(*inputs.gt, submission, c.eval_iou, c.multi_cam_gt_only); });
        rows.push_back({name, flags, std::move(report)});
    }
    stage("eval", [&] { write_text_file(outputs.add("ablation.json"), ablation_json(rows) + "\n"); });
    outputs.commit();
    return rows;
}

std::string ablation_json(const std::vector<AblationRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows) {
        json row = json::parse(report_json(r.report));
        json out;
        out["name"] = r.name;
        out["flags"] = {{"tfs", r.flags.tfs}, {"dbtm", r.flags.dbtm}, {"rerank", r.flags.rerank}, {"scac", r.flags.scac}};
        out.update(row);
        if (!r.report.warnings.empty()) out["warnings"] = r.report.warnings;
        arr.push_back(out);
    }
    return arr.dump(2);
}

std::string ablation_table(const std::vector<AblationRow>& rows) {
    std::ostringstream os;
    char line[160];
    std::snprintf(line, sizeof line, "%-10s %8s %8s %8s %10s %8s\n", "row", "IDF1", "IDP", "IDR", "Precision",
                  "Recall");
    os << line;
    for (const auto& r : rows) {
        std::snprintf(line, sizeof line, "%-10s %8.2f %8.2f %8.2f %10.2f %8.2f\n", r.name.c_str(),
                      100.0 * r.report.id.idf1, 100.0 * r.report.id.idp, 100.0 * r.report.id.idr,
                      100.0 * r.report.detection.precision, 100.0 * r.report.detection.recall);
        os << line;
    }
    return os.str();
}

}  // namespace mtmct
