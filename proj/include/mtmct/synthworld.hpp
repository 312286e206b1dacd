#pragma once

#include "mtmct/io.hpp"
#include "mtmct/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace mtmct {

/// Knobs of the synthetic crossroad world. Cameras form a chain along a
/// horizontal main road; every camera shares the same 1280x720 zone layout.
struct WorldConfig {
    std::string name = "custom";
    int n_cameras = 3;
    int n_vehicles = 10;
    int frame_count = 1000;
    int transit_min = 20;
    int transit_max = 60;
    int embedding_dim = 64;
    /// Angle (radians) between identity means of the same appearance family.
    /// Families of size 1 make every identity independent.
    double identity_separation = 1.5707963267948966;
    int family_size = 1;
    double per_camera_bias_magnitude = 0.0;
    /// Norm of the additive feature noise before normalization.
    double feature_noise_sigma = 0.0;
    double bbox_noise_sigma = 0.0;
    int false_positive_count = 0;
    int side_road_vehicle_count = 0;
    double detection_drop_rate = 0.0;
    /// Probability that a main-road vehicle drives against camera order.
    double reverse_fraction = 0.5;
    /// Shortest route in cameras; 0 means every vehicle crosses every camera.
    int min_route_cameras = 0;
    double speed = 20.0;
    int camera_id_base = 41;
    std::uint64_t seed = 7;
};

WorldConfig world_config_from_json(const std::string& text);
std::string world_config_to_json(const WorldConfig& config);

/// Named preset with constants fixed per version.
WorldConfig stress_preset(const std::string& name = "stress-v1");

/// Noise-free world: no bias, no drops, no distractors.
WorldConfig zero_noise_world(int n_cameras, int n_vehicles, std::uint64_t seed);

enum class TruthKind { vehicle, side_road, static_false_positive };

struct DetectionTruth {
    TruthKind kind = TruthKind::vehicle;
    /// Ground-truth id for vehicles; a distinct negative id otherwise.
    int identity = 0;
    /// Norm of the feature before normalization.
    double raw_norm = 1.0;
};

struct CameraPass {
    int camera_id = 0;
    int first_frame = 0;
    int last_frame = 0;
    bool reverse = false;
};

struct VehicleRoute {
    int identity = 0;
    bool reverse = false;
    std::vector<CameraPass> passes;
};

struct World {
    WorldConfig config;
    /// Sorted by camera, then frame; row == index.
    std::vector<Detection> detections;
    std::vector<DetectionTruth> truth;
    ZoneMap zones;
    CameraTopology topology;
    /// Main-road vehicles only, in submission format.
    std::vector<SubmissionRow> ground_truth;
    std::vector<VehicleRoute> routes;
    /// Unit identity means, one row per appearance identity.
    Eigen::MatrixXd identity_means;
    /// Bias added to every embedding of a camera, one row per topology index.
    Eigen::MatrixXd camera_bias;

    std::size_t gt_passes() const;
};

/// Deterministic in `config.seed`; throws ConfigError when the traffic
/// cannot be scheduled without overlapping vehicles.
World generate(const WorldConfig& config);

struct WorldFiles {
    std::filesystem::path detections;
    std::filesystem::path features;
    std::filesystem::path zones;
    std::filesystem::path topology;
    std::filesystem::path ground_truth;
    std::filesystem::path manifest;
};

WorldFiles world_files(const std::filesystem::path& dir);
WorldFiles write_world(const World& world, const std::filesystem::path& dir);

}  // namespace mtmct
