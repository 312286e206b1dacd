#pragma once

#include "mtmct/types.hpp"
#include "mtmct/zones.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace mtmct {

/// Adjacent camera pairs (previous, next) in driving order.
std::vector<std::pair<int, int>> candidate_pairs(const CameraTopology& topology);

struct MergeRecord {
    std::string phase;
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    double distance = 0.0;
    bool accepted = true;
};

/// Union-find over tracklet indices with an audit log of every merge
/// attempted in either clustering phase.
class MatchGraph {
public:
    explicit MatchGraph(std::size_t n);

    std::size_t size() const { return parent_.size(); }
    std::size_t find(std::size_t i) const;
    bool connected(std::size_t a, std::size_t b) const { return find(a) == find(b); }

    /// Members of the set containing `i`, ascending.
    std::vector<std::size_t> members(std::size_t i) const;

    /// Joins the sets of all `items` if `compatible` accepts the union.
    /// Returns whether the merge was committed; the attempt is logged either way.
    bool merge(const std::string& phase, const std::vector<std::size_t>& left,
               const std::vector<std::size_t>& right, double distance,
               const std::function<bool(const std::vector<std::size_t>&)>& compatible);

    /// Sets ordered by first member, members ascending.
    std::vector<std::vector<std::size_t>> partition() const;
    const std::vector<MergeRecord>& log() const { return log_; }

private:
    mutable std::vector<std::size_t> parent_;
    std::vector<MergeRecord> log_;
};

struct LocalCluster {
    std::vector<std::size_t> members;
    /// Normalized mean of the member features.
    Feature expanded_feature;
};

/// Similarity among unit features (one per row); the pipeline plugs in plain
/// cosine or re-ranking depending on configuration.
using UnitSimilarity = std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)>;

struct ScacInput {
    const std::vector<Tracklet>& tracklets;
    const CameraTopology& topology;
    /// Final tracklet features, one row per tracklet.
    const Eigen::MatrixXd& features;
    /// Masked similarity.
    const Eigen::MatrixXd& similarity;
    const MaskMatrix& mask;
    UnitSimilarity unit_similarity;
};

struct ScacConfig {
    double inter_zone_threshold = 0.2;
    double inter_cam_threshold = 0.2;
    bool include_single_camera = false;
};

/// True when no two of the tracklets share a camera or a zero mask entry.
bool compatible_group(const ScacInput& input, const std::vector<std::size_t>& group);

/// Clusters exit/entry tracklets of each adjacent camera pair and returns
/// the resulting multi-member sets with their expanded features.
std::vector<LocalCluster> inter_zone_cluster(const ScacInput& input, double threshold, MatchGraph& graph);

/// Clusters local clusters and leftover tracklets across all cameras.
std::vector<std::vector<std::size_t>> inter_cam_cluster(const ScacInput& input,
                                                        const std::vector<LocalCluster>& local,
                                                        double threshold, MatchGraph& graph);

/// One agglomerative pass over every tracklet (used when SCAC is disabled).
std::vector<std::vector<std::size_t>> global_cluster(const ScacInput& input, double threshold,
                                                     MatchGraph& graph);

/// Both SCAC phases.
std::vector<std::vector<std::size_t>> run_scac(const ScacInput& input, const ScacConfig& config,
                                               MatchGraph& graph);

/// Numbers clusters 1.. by earliest start frame. Single-camera clusters are
/// dropped unless requested.
std::vector<GlobalTrajectory> assign_global_ids(const std::vector<std::vector<std::size_t>>& partition,
                                                const std::vector<Tracklet>& tracklets,
                                                bool include_single_camera);

void write_merge_log(const MatchGraph& graph, const std::vector<Tracklet>& tracklets,
                     const std::filesystem::path& path);

}  // namespace mtmct
