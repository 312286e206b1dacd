#include "helpers.hpp"
#include "mtmct/evalkit.hpp"
#include "mtmct/io.hpp"
#include "mtmct/synthworld.hpp"
#include "mtmct/zones.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace mtmct;
using testing_support::TempDir;

namespace {

std::map<int, std::vector<std::size_t>> rows_by_identity(const World& w, TruthKind kind) {
    std::map<int, std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < w.truth.size(); ++i)
        if (w.truth[i].kind == kind) out[w.truth[i].identity].push_back(i);
    return out;
}

}  // namespace

TEST_CASE("full-route vehicles produce one pass per camera") {
    const auto w = generate(zero_noise_world(3, 2, 5));
    CHECK(w.gt_passes() == 6);
    REQUIRE(w.routes.size() == 2);
    for (const auto& r : w.routes) {
        CHECK(r.passes.size() == 3);
        for (std::size_t k = 1; k < r.passes.size(); ++k) CHECK(r.passes[k].first_frame > r.passes[k - 1].last_frame);
    }
    std::set<std::pair<int, int>> seen;
    for (const auto& g : w.ground_truth) seen.insert({g.global_id, g.camera_id});
    CHECK(seen.size() == 6);
}

TEST_CASE("generation is deterministic in the seed") {
    const auto config = stress_preset();
    TempDir a("world-a"), b("world-b");
    const auto fa = write_world(generate(config), a.path());
    const auto fb = write_world(generate(config), b.path());
    CHECK(read_text_file(fa.detections) == read_text_file(fb.detections));
    CHECK(read_text_file(fa.features) == read_text_file(fb.features));
    CHECK(read_text_file(fa.ground_truth) == read_text_file(fb.ground_truth));
    CHECK(read_text_file(fa.manifest) == read_text_file(fb.manifest));

    auto other = config;
    other.seed += 1;
    CHECK(generate(other).detections.size() != generate(config).detections.size());
}

TEST_CASE("static false positives keep a constant box in one zone") {
    auto c = zero_noise_world(3, 4, 11);
    c.false_positive_count = 5;
    const auto w = generate(c);
    const auto streams = rows_by_identity(w, TruthKind::static_false_positive);
    CHECK(streams.size() == 5);
    for (const auto& [id, rows] : streams) {
        const auto& first = w.detections[rows.front()];
        const auto zone = assign_zone(first.bbox, w.zones.at(first.camera_id));
        REQUIRE(zone.has_value());
        for (auto r : rows) {
            CHECK(w.detections[r].camera_id == first.camera_id);
            CHECK(w.detections[r].bbox == first.bbox);
        }
    }
}

TEST_CASE("side-road vehicles cross between zones 1 and 2") {
    auto c = zero_noise_world(3, 4, 13);
    c.side_road_vehicle_count = 6;
    const auto w = generate(c);
    const auto crossings = rows_by_identity(w, TruthKind::side_road);
    CHECK(crossings.size() == 6);
    for (const auto& [id, rows] : crossings) {
        const auto& first = w.detections[rows.front()];
        const auto& last = w.detections[rows.back()];
        const auto& zones = w.zones.at(first.camera_id);
        const auto zs = assign_zone(first.bbox, zones);
        const auto ze = assign_zone(last.bbox, zones);
        REQUIRE(zs.has_value());
        REQUIRE(ze.has_value());
        CHECK(is_side_road(*zs));
        CHECK(is_side_road(*ze));
        CHECK(*zs != *ze);
    }
    // Side-road traffic never enters the ground truth.
    for (const auto& g : w.ground_truth) CHECK(g.global_id > 0);
}

TEST_CASE("main-road passes run between zones 3 and 4 in travel direction") {
    const auto w = generate(zero_noise_world(3, 6, 17));
    for (const auto& [id, rows] : rows_by_identity(w, TruthKind::vehicle)) {
        std::map<int, std::vector<std::size_t>> per_camera;
        for (auto r : rows) per_camera[w.detections[r].camera_id].push_back(r);
        for (const auto& [cam, rs] : per_camera) {
            const auto& zones = w.zones.at(cam);
            const auto zs = assign_zone(w.detections[rs.front()].bbox, zones);
            const auto ze = assign_zone(w.detections[rs.back()].bbox, zones);
            REQUIRE(zs.has_value());
            REQUIRE(ze.has_value());
            CHECK(*zs != *ze);
            CHECK_FALSE(is_side_road(*zs));
            CHECK_FALSE(is_side_road(*ze));
        }
    }
}

TEST_CASE("camera bias is the exact offset of noise-free embeddings") {
    auto c = zero_noise_world(3, 5, 23);
    c.per_camera_bias_magnitude = 0.4;
    const auto w = generate(c);
    for (Eigen::Index i = 0; i < w.camera_bias.rows(); ++i)
        CHECK(w.camera_bias.row(i).norm() == doctest::Approx(0.4).epsilon(1e-12));
    for (std::size_t r = 0; r < w.detections.size(); ++r) {
        const auto& d = w.detections[r];
        if (w.truth[r].kind != TruthKind::vehicle) continue;
        const Feature raw = d.feature * w.truth[r].raw_norm;
        const Feature mean = w.identity_means.row(w.truth[r].identity - 1).transpose();
        const Feature offset = raw - mean;
        const Feature bias = w.camera_bias.row(w.topology.index_of(d.camera_id)).transpose();
        CHECK((offset - bias).norm() < 1e-9);
    }
}

TEST_CASE("noisy embeddings keep their camera's bias direction") {
    auto c = zero_noise_world(2, 8, 29);
    c.per_camera_bias_magnitude = 0.5;
    c.feature_noise_sigma = 0.35;
    const auto w = generate(c);
    std::map<int, Feature> offset_sum;
    for (std::size_t r = 0; r < w.detections.size(); ++r) {
        const auto& d = w.detections[r];
        if (w.truth[r].kind != TruthKind::vehicle) continue;
        const Feature raw = d.feature * w.truth[r].raw_norm;
        const Feature off = raw - w.identity_means.row(w.truth[r].identity - 1).transpose();
        auto [it, fresh] = offset_sum.try_emplace(d.camera_id, Feature::Zero(off.size()));
        it->second += off;
    }
    for (const auto& [cam, sum] : offset_sum) {
        const Feature bias = w.camera_bias.row(w.topology.index_of(cam)).transpose();
        CHECK(sum.normalized().dot(bias.normalized()) > 0.95);
    }
}

TEST_CASE("stress preset constants") {
    const auto c = stress_preset("stress-v1");
    CHECK(c.n_cameras == 6);
    CHECK(c.n_vehicles == 40);
    CHECK(c.frame_count == 1800);
    CHECK(c.embedding_dim == 64);
    CHECK(c.false_positive_count == 8);
    CHECK(c.side_road_vehicle_count == 24);
    CHECK(c.per_camera_bias_magnitude == 0.5);
    CHECK(c.seed == 2021);
    CHECK_THROWS_AS(stress_preset("stress-v0"), ConfigError);

    const auto merged = world_config_from_json(R"({"preset": "stress-v1", "seed": 9})");
    CHECK(merged.seed == 9);
    CHECK(merged.n_vehicles == 40);
    const auto round = world_config_from_json(world_config_to_json(c));
    CHECK(world_config_to_json(round) == world_config_to_json(c));
}

TEST_CASE("ground truth scored against itself is perfect") {
    const auto w = generate(stress_preset());
    const auto report = evaluate(w.ground_truth, w.ground_truth);
    CHECK(report.id.idf1 == 1.0);
    CHECK(report.detection.precision == 1.0);
}

TEST_CASE("written world parses back") {
    const auto w = generate(zero_noise_world(2, 3, 31));
    TempDir dir("world-io");
    const auto files = write_world(w, dir.path());
    const auto dets = parse_detections(files.detections, files.features, std::size_t(w.config.embedding_dim));
    REQUIRE(dets.size() == w.detections.size());
    CHECK(dets.front().camera_id == w.detections.front().camera_id);
    CHECK(parse_topology(files.topology).cameras() == w.topology.cameras());
    CHECK(parse_submission(files.ground_truth).size() == w.ground_truth.size());
}

TEST_CASE("invalid or infeasible configs are rejected") {
    auto crowded = zero_noise_world(3, 200, 1);
    crowded.frame_count = 100;
    CHECK_THROWS_AS(generate(crowded), ConfigError);
    auto bad = zero_noise_world(3, 2, 1);
    bad.detection_drop_rate = 1.5;
    CHECK_THROWS_AS(generate(bad), ConfigError);
    bad = zero_noise_world(3, 2, 1);
    bad.false_positive_count = 13;
    CHECK_THROWS_AS(generate(bad), ConfigError);
    CHECK_THROWS_AS(world_config_from_json("{not json"), ConfigError);
}
