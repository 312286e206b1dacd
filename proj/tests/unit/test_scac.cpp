#include "helpers.hpp"
#include "mtmct/affinity.hpp"
#include "mtmct/scac.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace mtmct;
using testing_support::endpoint_tracklet;
using testing_support::vec;

namespace {

Tracklet with_feature(Tracklet t, const Feature& f) {
    for (auto& o : t.observations) o.feature = f;
    return t;
}

struct Scene {
    std::vector<Tracklet> tracklets;
    CameraTopology topology;
    Eigen::MatrixXd features;
    MaskMatrix mask;
    Eigen::MatrixXd similarity;

    Scene(std::vector<Tracklet> ts, CameraTopology topo) : tracklets(std::move(ts)), topology(std::move(topo)) {
        features = tracklet_features(tracklets);
        mask = build_dbtm(tracklets, topology);
        similarity = apply_mask(similarity_matrix(features), mask);
    }
    ScacInput input() const {
        return {tracklets, topology, features, similarity, mask,
                [](const Eigen::MatrixXd& f) { return similarity_matrix(f); }};
    }
};

}  // namespace

TEST_CASE("adjacent camera pairs") {
    CHECK(candidate_pairs(CameraTopology({41, 42, 43})) == std::vector<std::pair<int, int>>{{41, 42}, {42, 43}});
    CHECK(candidate_pairs(CameraTopology({41})).empty());
    CHECK(candidate_pairs(CameraTopology({41, 42, 43, 44, 45, 46})).size() == 5);
}

TEST_CASE("match graph merges, refuses and logs") {
    MatchGraph g(4);
    auto always = [](const std::vector<std::size_t>&) { return true; };
    auto never = [](const std::vector<std::size_t>&) { return false; };
    CHECK(g.merge("p", {0}, {2}, 0.1, always));
    CHECK(g.connected(0, 2));
    CHECK_FALSE(g.merge("p", {1}, {2}, 0.1, never));
    CHECK_FALSE(g.connected(1, 2));
    CHECK(g.members(2) == std::vector<std::size_t>{0, 2});
    CHECK(g.partition() == std::vector<std::vector<std::size_t>>{{0, 2}, {1}, {3}});
    REQUIRE(g.log().size() == 2);
    CHECK(g.log()[1].accepted == false);
}

TEST_CASE("inter-zone clustering joins an exit with the next entry") {
    const Feature f = vec({1, 0, 0});
    Scene s({with_feature(endpoint_tracklet(41, 1, 4, 3, 0, 50), f), with_feature(endpoint_tracklet(42, 1, 4, 3, 80, 130), f)},
            CameraTopology({41, 42}));
    MatchGraph g(2);
    const auto local = inter_zone_cluster(s.input(), 0.2, g);
    REQUIRE(local.size() == 1);
    CHECK(local[0].members == std::vector<std::size_t>{0, 1});
    CHECK(local[0].expanded_feature.isApprox(f));
    CHECK(g.log().front().phase == "inter_zone");
}

TEST_CASE("inter-zone clustering never joins masked pairs") {
    const Feature f = vec({1, 0, 0});
    // Entry in 42 happens before the exit from 41.
    Scene s({with_feature(endpoint_tracklet(41, 1, 4, 3, 0, 50), f), with_feature(endpoint_tracklet(42, 1, 4, 3, 30, 130), f)},
            CameraTopology({41, 42}));
    REQUIRE(s.mask(0, 1) == 0);
    MatchGraph g(2);
    CHECK(inter_zone_cluster(s.input(), 0.2, g).empty());
}

TEST_CASE("inter-zone clustering with no candidates") {
    const Feature f = vec({1, 0, 0});
    // Neither tracklet touches zones 3/4 in an exit or entry role.
    Scene s({with_feature(endpoint_tracklet(41, 1, 1, 2, 0, 50), f), with_feature(endpoint_tracklet(42, 1, 2, 1, 80, 130), f)},
            CameraTopology({41, 42}));
    MatchGraph g(2);
    CHECK(inter_zone_cluster(s.input(), 0.2, g).empty());
    CHECK(g.log().empty());
}

TEST_CASE("reverse traffic is clustered too") {
    const Feature f = vec({0, 1, 0});
    // Drives from 42 back to 41: leaves 42 by zone 4, enters 41 by zone 3.
    Scene s({with_feature(endpoint_tracklet(41, 1, 3, 4, 100, 150), f), with_feature(endpoint_tracklet(42, 1, 3, 4, 0, 60), f)},
            CameraTopology({41, 42}));
    MatchGraph g(2);
    CHECK(inter_zone_cluster(s.input(), 0.2, g).size() == 1);
}

TEST_CASE("three-camera vehicle ends up in one cluster") {
    const Feature f = vec({1, 0, 0});
    const Feature other = vec({0, 0, 1});
    Scene s({with_feature(endpoint_tracklet(41, 1, 4, 3, 0, 50), f), with_feature(endpoint_tracklet(42, 1, 4, 3, 80, 130), f),
             with_feature(endpoint_tracklet(43, 1, 4, 3, 160, 210), f),
             with_feature(endpoint_tracklet(43, 2, 3, 4, 0, 40), other)},
            CameraTopology({41, 42, 43}));
    MatchGraph g(4);
    const auto partition = run_scac(s.input(), {}, g);
    CHECK(partition == std::vector<std::vector<std::size_t>>{{0, 1, 2}, {3}});
    const auto ids = assign_global_ids(partition, s.tracklets, false);
    REQUIRE(ids.size() == 1);
    CHECK(ids[0].members.size() == 3);
}

TEST_CASE("opposite directions stay apart despite equal looks") {
    const Feature f = vec({1, 0, 0});
    // A drives 41 -> 42 at t 0..130, B drives 42 -> 41 at the same time.
    Scene s({with_feature(endpoint_tracklet(41, 1, 4, 3, 0, 50), f), with_feature(endpoint_tracklet(42, 1, 4, 3, 80, 130), f),
             with_feature(endpoint_tracklet(42, 2, 3, 4, 0, 50), f), with_feature(endpoint_tracklet(41, 2, 3, 4, 80, 130), f)},
            CameraTopology({41, 42}));
    MatchGraph g(4);
    const auto partition = run_scac(s.input(), {}, g);
    CHECK(partition == std::vector<std::vector<std::size_t>>{{0, 1}, {2, 3}});
}

TEST_CASE("inter-cam phase only coarsens and keeps constraints") {
    std::mt19937_64 rng(67);
    std::normal_distribution<double> n(0, 1);
    std::uniform_int_distribution<int> cam(0, 3), zone(1, 4), time(0, 300), span(10, 60);
    for (int trial = 0; trial < 30; ++trial) {
        std::vector<Tracklet> ts;
        std::vector<Feature> looks;
        for (int k = 0; k < 5; ++k) looks.push_back(vec({n(rng), n(rng), n(rng), n(rng)}).normalized());
        for (int i = 0; i < 24; ++i) {
            const int t0 = time(rng);
            Feature f = looks[std::size_t(i % 5)] + 0.1 * vec({n(rng), n(rng), n(rng), n(rng)});
            ts.push_back(with_feature(endpoint_tracklet(41 + cam(rng), i, zone(rng), zone(rng), t0, t0 + span(rng)),
                                      f.normalized()));
        }
        Scene s(ts, CameraTopology({41, 42, 43, 44}));
        MatchGraph g(ts.size());
        const auto input = s.input();
        const auto local = inter_zone_cluster(input, 0.2, g);
        const auto partition = inter_cam_cluster(input, local, 0.2, g);
        for (const auto& c : local) {
            const auto members = g.members(c.members.front());
            for (auto m : c.members) CHECK(std::find(members.begin(), members.end(), m) != members.end());
        }
        for (const auto& cluster : partition) {
            CHECK(compatible_group(input, cluster));
            std::set<int> cams;
            for (auto i : cluster) cams.insert(ts[i].camera_id);
            CHECK(cams.size() == cluster.size());
        }
        for (const auto& r : g.log()) {
            if (r.accepted) CHECK(r.distance < 0.2);
        }
    }
}

TEST_CASE("global ids follow start time and camera coverage") {
    std::vector<Tracklet> ts = {endpoint_tracklet(41, 1, 4, 3, 50, 60), endpoint_tracklet(42, 1, 4, 3, 70, 80),
                                endpoint_tracklet(41, 2, 4, 3, 10, 20), endpoint_tracklet(42, 2, 4, 3, 30, 40),
                                endpoint_tracklet(43, 1, 4, 3, 5, 9)};
    const std::vector<std::vector<std::size_t>> partition = {{0, 1}, {2, 3}, {4}};
    const auto ids = assign_global_ids(partition, ts, false);
    REQUIRE(ids.size() == 2);
    CHECK(ids[0].global_id == 1);
    CHECK(ids[0].members[0].first_frame() == 10);
    CHECK(ids[1].global_id == 2);
    CHECK(assign_global_ids({{4}}, ts, false).empty());
    CHECK(assign_global_ids({{4}}, ts, true).size() == 1);
}

TEST_CASE("global clustering respects same-camera and mask constraints") {
    const Feature f = vec({1, 0, 0});
    Scene s({with_feature(endpoint_tracklet(41, 1, 4, 3, 0, 50), f), with_feature(endpoint_tracklet(41, 2, 4, 3, 60, 90), f),
             with_feature(endpoint_tracklet(42, 1, 4, 3, 80, 130), f)},
            CameraTopology({41, 42}));
    MatchGraph g(3);
    for (const auto& c : global_cluster(s.input(), 0.2, g)) CHECK(compatible_group(s.input(), c));
}
