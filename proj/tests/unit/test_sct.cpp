#include "helpers.hpp"
#include "mtmct/kalman.hpp"
#include "mtmct/sct.hpp"
#include "mtmct/synthworld.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace mtmct;
using testing_support::vec;

namespace {

Detection det(BBox box, double conf, Feature f = vec({1, 0}), int frame = 0) {
    Detection d;
    d.camera_id = 41;
    d.frame = frame;
    d.bbox = box;
    d.confidence = conf;
    d.feature = std::move(f);
    return d;
}

KalmanState state_of(std::initializer_list<double> mean) {
    KalmanState s;
    int k = 0;
    for (double v : mean) s.mean[k++] = v;
    return s;
}

}  // namespace

TEST_CASE("nms examples") {
    SUBCASE("identical boxes keep the more confident one") {
        const auto kept = nms({det({0, 0, 10, 10}, 0.8), det({0, 0, 10, 10}, 0.9)}, 0.5, 0.0);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].confidence == 0.9);
    }
    SUBCASE("disjoint boxes survive") {
        CHECK(nms({det({0, 0, 10, 10}, 0.8), det({50, 0, 10, 10}, 0.9)}, 0.5, 0.0).size() == 2);
    }
    SUBCASE("chain keeps both ends") {
        // A-B and B-C overlap with IoU 0.6, A and C are disjoint.
        const auto kept = nms({det({0, 0, 10, 10}, 0.9), det({2.5, 0, 10, 10}, 0.8), det({12, 0, 10, 10}, 0.7)},
                              0.5, 0.0);
        REQUIRE(kept.size() == 2);
        CHECK(kept[0].confidence == 0.9);
        CHECK(kept[1].confidence == 0.7);
    }
    SUBCASE("ties keep the lower index") {
        auto a = det({0, 0, 10, 10}, 0.5);
        a.row = 1;
        auto b = det({0, 0, 10, 10}, 0.5);
        b.row = 2;
        const auto kept = nms({a, b}, 0.5, 0.0);
        REQUIRE(kept.size() == 1);
        CHECK(kept[0].row == 1);
    }
    SUBCASE("confidence floor applies first") {
        CHECK(nms({det({0, 0, 10, 10}, 0.05)}, 0.5, 0.1).empty());
    }
}

TEST_CASE("detection filter thresholds") {
    CHECK(filter_detections({det({0, 0, 100, 100}, 0.05)}).empty());
    CHECK(filter_detections({det({0, 0, 7.49, 100}, 0.5)}).empty());
    CHECK(filter_detections({det({0, 0, 7.5, 100}, 0.5)}).size() == 1);
    CHECK(filter_detections({det({0, 0, 100, 100}, 0.5)}).size() == 1);
    CHECK(filter_detections({det({0, 0, 100, 100}, 0.1)}).size() == 1);
}

TEST_CASE("kalman predict under constant velocity") {
    const KalmanFilter kf(KalmanNoise::none());
    auto s = kf.predict(state_of({0, 0, 1, 10, 1, 0, 0, 0}));
    CHECK(s.mean[0] == 1.0);
    CHECK(s.mean[3] == 10.0);
    CHECK(s.mean[4] == 1.0);

    auto still = kf.predict(state_of({3, 4, 1, 10, 0, 0, 0, 0}));
    CHECK(still.mean[0] == 3.0);
    CHECK(still.mean[1] == 4.0);

    auto moving = state_of({0, 0, 1, 10, 2, 0, 0, 0});
    for (int i = 0; i < 5; ++i) moving = kf.predict(moving);
    CHECK(moving.mean[0] == doctest::Approx(10.0));
}

TEST_CASE("kalman covariance grows by process noise") {
    const KalmanFilter kf;
    const auto s0 = kf.initiate({0, 0, 20, 40});
    const auto s1 = kf.predict(s0);
    CHECK(s1.covariance.trace() > s0.covariance.trace());
    CHECK((s1.covariance - s1.covariance.transpose()).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("kalman update with zero innovation keeps position") {
    const KalmanFilter kf;
    const auto s = kf.predict(kf.initiate({10, 20, 30, 40}));
    const auto u = kf.update(s, to_bbox(s.mean));
    for (int k = 0; k < 4; ++k) CHECK(u.mean[k] == doctest::Approx(s.mean[k]).epsilon(1e-12));
}

TEST_CASE("kalman update follows the scalar gain on each coordinate") {
    const KalmanFilter kf;
    const auto s = kf.initiate({10, 20, 30, 40});  // diagonal covariance
    const BBox z{16, 20, 30, 40};                  // cx moves by 6
    const auto u = kf.update(s, z);
    const double p = s.covariance(0, 0);
    const double r = std::pow(kf.noise().position_weight * 40.0, 2) + 1e-9;
    const double expected = 25.0 + p / (p + r) * 6.0;
    CHECK(u.mean[0] == doctest::Approx(expected).epsilon(1e-9));
    CHECK(std::abs(u.mean[0] - expected) < 1e-6);
    CHECK(u.covariance(0, 0) == doctest::Approx(p * r / (p + r)).epsilon(1e-9));
}

TEST_CASE("kalman trusts precise measurements") {
    KalmanNoise tiny;
    tiny.position_weight = 1e-6;
    tiny.aspect_measurement_std = 1e-6;
    const KalmanFilter kf(tiny);
    KalmanState s = state_of({0, 0, 1, 10, 0, 0, 0, 0});
    s.covariance = StateCovariance::Identity() * 1e6;
    const BBox z{100, 50, 24, 12};
    const auto u = kf.update(s, z);
    const auto m = to_measurement(z);
    for (int k = 0; k < 4; ++k) CHECK(std::abs(u.mean[k] - m[k]) < 1e-3);
}

TEST_CASE("kalman covariance trace never rises under repeated identical measurements") {
    const KalmanFilter kf;
    auto s = kf.initiate({10, 10, 40, 40});
    double previous = s.covariance.trace();
    for (int i = 0; i < 10; ++i) {
        s = kf.update(s, {10, 10, 40, 40});
        const double trace = s.covariance.trace();
        CHECK(trace <= previous + 1e-12);
        previous = trace;
    }
}

TEST_CASE("cascade stages") {
    const SctConfig config;
    const KalmanFilter kf(config.noise);
    auto make_track = [&](BBox box, Feature f) {
        Track t;
        t.local_id = 1;
        t.state = kf.predict(kf.initiate(box));
        t.smoothed_feature = std::move(f);
        t.status = TrackStatus::active;
        return t;
    };
    SUBCASE("same feature and place matches in the appearance stage") {
        const auto r = cascade_match({make_track({0, 0, 50, 100}, vec({1, 0}))}, {det({0, 0, 50, 100}, 0.9)}, kf, config);
        CHECK(r.matches == std::vector<Match>{{0, 0}});
    }
    SUBCASE("orthogonal feature with high overlap matches on IoU") {
        // IoU of the two boxes is 0.9 / 1.1 > 0.5.
        const auto r =
            cascade_match({make_track({0, 0, 50, 100}, vec({1, 0}))}, {det({0, 5, 50, 100}, 0.9, vec({0, 1}))}, kf, config);
        CHECK(r.matches == std::vector<Match>{{0, 0}});
    }
    SUBCASE("far away and no overlap stays unmatched") {
        const auto r = cascade_match({make_track({0, 0, 50, 100}, vec({1, 0}))}, {det({900, 500, 50, 100}, 0.9)}, kf,
                                     config);
        CHECK(r.matches.empty());
        CHECK(r.unmatched_tracks == std::vector<std::size_t>{0});
        CHECK(r.unmatched_detections == std::vector<std::size_t>{0});
    }
    SUBCASE("lost tracks skip the overlap stage") {
        auto t = make_track({0, 0, 50, 100}, vec({1, 0}));
        t.status = TrackStatus::lost;
        const auto r = cascade_match({t}, {det({0, 5, 50, 100}, 0.9, vec({0, 1}))}, kf, config);
        CHECK(r.matches.empty());
    }
}

TEST_CASE("tracker lifecycle") {
    SctConfig config;
    SUBCASE("repeated detection forms one tracklet") {
        std::vector<Detection> dets;
        for (int f = 0; f < 10; ++f) dets.push_back(det({100, 100, 50, 40}, 0.9, vec({0.6, 0.8}), f));
        const auto tracklets = track_camera(dets, config);
        REQUIRE(tracklets.size() == 1);
        CHECK(tracklets[0].observations.size() == 10);
        for (int f = 0; f < 10; ++f) CHECK(tracklets[0].observations[std::size_t(f)].t == f);
    }
    SUBCASE("single-frame detection is dropped") {
        CHECK(track_camera({det({100, 100, 50, 40}, 0.9, vec({1, 0}), 3)}, config).empty());
    }
    SUBCASE("lost tracks expire after max_age") {
        config.max_age = 5;
        std::vector<Detection> dets;
        for (int f = 0; f < 3; ++f) dets.push_back(det({100, 100, 50, 40}, 0.9, vec({1, 0}), f));
        dets.push_back(det({600, 400, 50, 40}, 0.9, vec({0, 1}), 3));
        for (int f = 20; f < 23; ++f) dets.push_back(det({100, 100, 50, 40}, 0.9, vec({1, 0}), f));
        const auto tracklets = track_camera(dets, config);
        REQUIRE(tracklets.size() == 2);
        CHECK(tracklets[0].observations.size() == 3);
        CHECK(tracklets[1].first_frame() == 20);
    }
    SUBCASE("a track survives a short gap") {
        std::vector<Detection> dets;
        for (int f : {0, 1, 2, 6, 7}) dets.push_back(det({100, 100, 50, 40}, 0.9, vec({1, 0}), f));
        dets.push_back(det({600, 400, 50, 40}, 0.9, vec({0, 1}), 4));
        const auto tracklets = track_camera(dets, config);
        REQUIRE(tracklets.size() == 1);
        CHECK(tracklets[0].observations.size() == 5);
    }
    SUBCASE("frames must increase") {
        CameraTracker tracker(41, config);
        tracker.step(5, {});
        CHECK_THROWS_AS(tracker.step(5, {}), Error);
    }
}

TEST_CASE("zero-noise world tracks every pass without id switches") {
    const auto world = generate(zero_noise_world(3, 10, 19));
    std::map<int, std::vector<Detection>> per_camera;
    for (const auto& d : world.detections) per_camera[d.camera_id].push_back(d);
    std::size_t total = 0;
    for (const auto& [cam, dets] : per_camera) {
        for (const auto& t : track_camera(dets, SctConfig{})) {
            ++total;
            std::set<int> identities;
            for (const auto& o : t.observations) identities.insert(world.truth[o.row].identity);
            CHECK(identities.size() == 1);
            for (std::size_t k = 1; k < t.observations.size(); ++k) {
                CHECK(t.observations[k].t > t.observations[k - 1].t);
            }
        }
    }
    CHECK(total == world.gt_passes());
}
