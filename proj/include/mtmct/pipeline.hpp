#pragma once

#include "mtmct/affinity.hpp"
#include "mtmct/evalkit.hpp"
#include "mtmct/scac.hpp"
#include "mtmct/sct.hpp"
#include "mtmct/types.hpp"
#include "mtmct/zones.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mtmct {

struct PipelinePaths {
    std::filesystem::path detections;
    std::filesystem::path features;
    std::filesystem::path zones;
    std::filesystem::path topology;
    /// Optional; without it no metrics are computed.
    std::filesystem::path gt;
    std::filesystem::path output = "out";
};

struct AblationFlags {
    bool tfs = true;
    bool dbtm = true;
    bool rerank = true;
    bool scac = true;
    friend bool operator==(const AblationFlags&, const AblationFlags&) = default;
};

struct PipelineConfig {
    PipelinePaths paths;
    std::size_t feature_dim = 0;
    SctConfig sct;
    AffinityConfig affinity;
    ScacConfig scac;
    /// Distance threshold of the single clustering pass used when SCAC is off.
    double cluster_threshold = 0.2;
    double eval_iou = 0.5;
    bool multi_cam_gt_only = false;
    bool cache = true;
    AblationFlags flags;
};

/// Reads a JSON config. Relative paths resolve against `base_dir`. Unknown
/// keys are rejected.
PipelineConfig pipeline_config_from_json(const std::string& text, const std::filesystem::path& base_dir = {});
PipelineConfig load_pipeline_config(const std::filesystem::path& path);
std::string pipeline_config_to_json(const PipelineConfig& config);

/// Config wired to the files of a generated world.
PipelineConfig config_for_world(const std::filesystem::path& world_dir, const std::filesystem::path& out_dir);

/// Failure inside a named stage; partial outputs of that run are removed.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& cause);
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

struct Inputs {
    std::vector<Detection> detections;
    ZoneMap zones;
    CameraTopology topology;
    std::optional<std::vector<SubmissionRow>> gt;
};

/// Missing files raise ConfigError; unreadable ones a StageError("ingest").
Inputs load_inputs(const PipelineConfig& config);

/// Per-camera tracking, one task per camera, concatenated in topology order.
/// With caching on, results are stored under <output>/cache keyed by a
/// SHA-256 of the detection and feature files plus the tracker settings.
std::vector<Tracklet> run_sct(const Inputs& inputs, const PipelineConfig& config);

struct MtmctResult {
    /// Tracklets that entered matching (after TFS when enabled).
    std::vector<Tracklet> tracklets;
    MaskMatrix mask;
    AffinityResult affinity;
    MatchGraph graph{0};
    std::vector<GlobalTrajectory> trajectories;
};

MtmctResult run_mtmct(std::vector<Tracklet> tracklets, const Inputs& inputs, const PipelineConfig& config);

struct PipelineResult {
    std::vector<SubmissionRow> submission;
    std::optional<EvalReport> report;
    std::size_t tracklet_count = 0;
};

/// Runs every stage and writes submission.txt, tracklets.jsonl,
/// merges.jsonl and (with gt) report.json into the output directory.
PipelineResult run_pipeline(const PipelineConfig& config);

struct AblationRow {
    std::string name;
    AblationFlags flags;
    EvalReport report;
};

/// Baseline, +TFS, +DBTM, +Rerank, +SCAC on one shared tracking run.
/// Writes ablation.json into the output directory. Requires gt.
std::vector<AblationRow> run_ablation(const PipelineConfig& config);

std::string ablation_json(const std::vector<AblationRow>& rows);
std::string ablation_table(const std::vector<AblationRow>& rows);

}  // namespace mtmct
