#include "mtmct/scac.hpp"

#include "mtmct/io.hpp"
#include "mtmct/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <numeric>
#include <set>

namespace mtmct {

std::vector<std::pair<int, int>> candidate_pairs(const CameraTopology& topology) {
    std::vector<std::pair<int, int>> out;
    const auto& cams = topology.cameras();
    for (std::size_t i = 0; i + 1 < cams.size(); ++i) out.emplace_back(cams[i], cams[i + 1]);
    return out;
}

MatchGraph::MatchGraph(std::size_t n) : parent_(n) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t MatchGraph::find(std::size_t i) const {
    while (parent_[i] != i) {
        parent_[i] = parent_[parent_[i]];
        i = parent_[i];
    }
    return i;
}

std::vector<std::size_t> MatchGraph::members(std::size_t i) const {
    const std::size_t root = find(i);
    std::vector<std::size_t> out;
    for (std::size_t k = 0; k < parent_.size(); ++k) {
        if (find(k) == root) out.push_back(k);
    }
    return out;
}

bool MatchGraph::merge(const std::string& phase, const std::vector<std::size_t>& left,
                       const std::vector<std::size_t>& right, double distance,
                       const std::function<bool(const std::vector<std::size_t>&)>& compatible) {
    std::set<std::size_t> roots;
    for (auto i : left) roots.insert(find(i));
    for (auto i : right) roots.insert(find(i));
    std::vector<std::size_t> united;
    for (std::size_t k = 0; k < parent_.size(); ++k) {
        if (roots.count(find(k))) united.push_back(k);
    }
    const bool ok = roots.size() < 2 || compatible(united);
    if (ok && roots.size() > 1) {
        const std::size_t target = *roots.begin();
        for (auto r : roots) parent_[r] = target;
    }
    log_.push_back({phase, left, right, distance, ok});
    return ok;
}

std::vector<std::vector<std::size_t>> MatchGraph::partition() const {
    std::map<std::size_t, std::vector<std::size_t>> sets;
    for (std::size_t k = 0; k < parent_.size(); ++k) sets[find(k)].push_back(k);
    std::vector<std::vector<std::size_t>> out;
    for (auto& [root, m] : sets) out.push_back(std::move(m));
    std::sort(out.begin(), out.end());
    return out;
}

bool compatible_group(const ScacInput& input, const std::vector<std::size_t>& group) {
    for (std::size_t a = 0; a < group.size(); ++a) {
        for (std::size_t b = a + 1; b < group.size(); ++b) {
            const auto i = group[a];
            const auto j = group[b];
            if (input.tracklets[i].camera_id == input.tracklets[j].camera_id) return false;
            if (input.mask(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) == 0) return false;
        }
    }
    return true;
}

namespace {

std::vector<std::size_t> remap(const std::vector<std::size_t>& local, const std::vector<std::size_t>& items) {
    std::vector<std::size_t> out;
    for (auto l : local) out.push_back(items[l]);
    return out;
}

// Clusters `items` on 1 - similarity and commits each merge to the graph.
void cluster_items(const ScacInput& input, const std::vector<std::size_t>& items, double threshold,
                   const std::string& phase, MatchGraph& graph) {
    const std::size_t n = items.size();
    if (n < 2) return;
    Eigen::MatrixXd dist(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    CannotLink cannot(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = 0; b < n; ++b) {
            dist(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                a == b ? 0.0
                       : 1.0 - input.similarity(static_cast<Eigen::Index>(items[a]),
                                                static_cast<Eigen::Index>(items[b]));
            if (a < b && !compatible_group(input, {items[a], items[b]})) cannot.add(a, b);
        }
    }
    const auto result = constrained_agglomerative(dist, threshold, cannot);
    const auto check = [&](const std::vector<std::size_t>& g) { return compatible_group(input, g); };
    for (const auto& m : result.merges) {
        graph.merge(phase, remap(m.left, items), remap(m.right, items), m.distance, check);
    }
}

Feature mean_feature(const Eigen::MatrixXd& features, const std::vector<std::size_t>& members) {
    Feature sum = Feature::Zero(features.cols());
    for (auto i : members) sum += features.row(static_cast<Eigen::Index>(i)).transpose();
    return sum.normalized();
}

}  // namespace

std::vector<LocalCluster> inter_zone_cluster(const ScacInput& input, double threshold, MatchGraph& graph) {
    const auto& tracklets = input.tracklets;
    auto has = [](const Tracklet& t, bool start, Zone z) {
        return t.endpoints && (start ? t.endpoints->start_zone : t.endpoints->end_zone) == z;
    };
    for (const auto& [prev, next] : candidate_pairs(input.topology)) {
        std::vector<std::size_t> forward, reverse;
        for (std::size_t i = 0; i < tracklets.size(); ++i) {
            const auto& t = tracklets[i];
            if (t.camera_id == prev) {
                if (has(t, false, Zone::toward_next)) forward.push_back(i);
                if (has(t, true, Zone::toward_next)) reverse.push_back(i);
            } else if (t.camera_id == next) {
                if (has(t, true, Zone::toward_previous)) forward.push_back(i);
                if (has(t, false, Zone::toward_previous)) reverse.push_back(i);
            }
        }
        cluster_items(input, forward, threshold, "inter_zone", graph);
        cluster_items(input, reverse, threshold, "inter_zone", graph);
    }

    std::vector<LocalCluster> out;
    for (auto& members : graph.partition()) {
        if (members.size() < 2) continue;
        Feature f = mean_feature(input.features, members);
        out.push_back({std::move(members), std::move(f)});
    }
    return out;
}

std::vector<std::vector<std::size_t>> inter_cam_cluster(const ScacInput& input,
                                                        const std::vector<LocalCluster>& local,
                                                        double threshold, MatchGraph& graph) {
    // Units: expanded local clusters plus every tracklet not in one.
    std::vector<std::vector<std::size_t>> units;
    std::vector<bool> covered(input.tracklets.size(), false);
    for (const auto& c : local) {
        units.push_back(c.members);
        for (auto i : c.members) covered[i] = true;
    }
    for (std::size_t i = 0; i < input.tracklets.size(); ++i) {
        if (!covered[i]) units.push_back({i});
    }
    std::sort(units.begin(), units.end());
    const std::size_t n = units.size();
    if (n < 2) return graph.partition();

    Eigen::MatrixXd unit_features(static_cast<Eigen::Index>(n), input.features.cols());
    for (std::size_t u = 0; u < n; ++u) {
        unit_features.row(static_cast<Eigen::Index>(u)) =
            units[u].size() == 1 ? Eigen::RowVectorXd(input.features.row(static_cast<Eigen::Index>(units[u][0])))
                                 : Eigen::RowVectorXd(mean_feature(input.features, units[u]).transpose());
    }
    const Eigen::MatrixXd sim = input.unit_similarity(unit_features);

    Eigen::MatrixXd dist = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    CannotLink cannot(n);
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            std::vector<std::size_t> joined = units[a];
            joined.insert(joined.end(), units[b].begin(), units[b].end());
            const bool ok = compatible_group(input, joined);
            const auto ia = static_cast<Eigen::Index>(a);
            const auto ib = static_cast<Eigen::Index>(b);
            const double s = ok ? sim(ia, ib) : 0.0;
            dist(ia, ib) = dist(ib, ia) = 1.0 - s;
            if (!ok) cannot.add(a, b);
        }
    }
    const auto result = constrained_agglomerative(dist, threshold, cannot);
    const auto check = [&](const std::vector<std::size_t>& g) { return compatible_group(input, g); };
    auto expand = [&](const std::vector<std::size_t>& unit_ids) {
        std::vector<std::size_t> items;
        for (auto u : unit_ids) items.insert(items.end(), units[u].begin(), units[u].end());
        std::sort(items.begin(), items.end());
        return items;
    };
    for (const auto& m : result.merges) {
        graph.merge("inter_cam", expand(m.left), expand(m.right), m.distance, check);
    }
    return graph.partition();
}

std::vector<std::vector<std::size_t>> global_cluster(const ScacInput& input, double threshold,
                                                     MatchGraph& graph) {
    std::vector<std::size_t> all(input.tracklets.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    cluster_items(input, all, threshold, "global", graph);
    return graph.partition();
}

std::vector<std::vector<std::size_t>> run_scac(const ScacInput& input, const ScacConfig& config,
                                               MatchGraph& graph) {
    const auto local = inter_zone_cluster(input, config.inter_zone_threshold, graph);
    return inter_cam_cluster(input, local, config.inter_cam_threshold, graph);
}

std::vector<GlobalTrajectory> assign_global_ids(const std::vector<std::vector<std::size_t>>& partition,
                                                const std::vector<Tracklet>& tracklets,
                                                bool include_single_camera) {
    struct Candidate {
        int start = 0;
        std::size_t first = 0;
        std::vector<std::size_t> members;
    };
    std::vector<Candidate> kept;
    for (const auto& cluster : partition) {
        if (cluster.empty()) continue;
        std::set<int> cameras;
        int start = tracklets[cluster.front()].first_frame();
        for (auto i : cluster) {
            cameras.insert(tracklets[i].camera_id);
            start = std::min(start, tracklets[i].first_frame());
        }
        if (cameras.size() < 2 && !include_single_camera) continue;
        kept.push_back({start, *std::min_element(cluster.begin(), cluster.end()), cluster});
    }
    std::sort(kept.begin(), kept.end(), [](const Candidate& a, const Candidate& b) {
        return std::tie(a.start, a.first) < std::tie(b.start, b.first);
    });
    std::vector<GlobalTrajectory> out;
    int next_id = 1;
    for (auto& c : kept) {
        GlobalTrajectory g;
        g.global_id = next_id++;
        std::sort(c.members.begin(), c.members.end(), [&](std::size_t a, std::size_t b) {
            return std::make_tuple(tracklets[a].first_frame(), tracklets[a].camera_id, a) <
                   std::make_tuple(tracklets[b].first_frame(), tracklets[b].camera_id, b);
        });
        for (auto i : c.members) g.members.push_back(tracklets[i]);
        out.push_back(std::move(g));
    }
    return out;
}

void write_merge_log(const MatchGraph& graph, const std::vector<Tracklet>& tracklets,
                     const std::filesystem::path& path) {
    using json = nlohmann::json;
    auto refs = [&](const std::vector<std::size_t>& items) {
        json arr = json::array();
        for (auto i : items) arr.push_back({tracklets[i].camera_id, tracklets[i].local_id});
        return arr;
    };
    std::string text;
    for (const auto& r : graph.log()) {
        json line = {{"phase", r.phase},
                     {"left", refs(r.left)},
                     {"right", refs(r.right)},
                     {"distance", r.distance},
                     {"accepted", r.accepted}};
        text += line.dump() + '\n';
    }
    write_text_file(path, text);
}

}  // namespace mtmct
