#pragma once

#include "mtmct/types.hpp"

#include <filesystem>
#include <random>
#include <string>

namespace testing_support {

// Scratch directory removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path_ = std::filesystem::temp_directory_path() /
                ("mtmct-" + tag + "-" + std::to_string(rd()) + std::to_string(rd()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

inline mtmct::Feature vec(std::initializer_list<double> values) {
    mtmct::Feature f(static_cast<Eigen::Index>(values.size()));
    Eigen::Index k = 0;
    for (double v : values) f[k++] = v;
    return f;
}

// Tracklet with two observations and explicit endpoints.
inline mtmct::Tracklet endpoint_tracklet(int camera, int local_id, int zs, int ze, int ts, int te) {
    mtmct::Tracklet t;
    t.camera_id = camera;
    t.local_id = local_id;
    t.observations.push_back({ts, {0, 0, 10, 10}, vec({1, 0}), 0});
    if (te != ts) t.observations.push_back({te, {0, 0, 10, 10}, vec({1, 0}), 0});
    t.endpoints = mtmct::TrackletEndpoints{mtmct::zone_from_label(zs), mtmct::zone_from_label(ze), ts, te};
    return t;
}

// Tracklet whose observations all carry `feature`.
inline mtmct::Tracklet feature_tracklet(int camera, int local_id, const mtmct::Feature& feature, int t0 = 0,
                                        int length = 3) {
    mtmct::Tracklet t;
    t.camera_id = camera;
    t.local_id = local_id;
    for (int k = 0; k < length; ++k) t.observations.push_back({t0 + k, {0, 0, 10, 10}, feature, 0});
    return t;
}

}  // namespace testing_support
