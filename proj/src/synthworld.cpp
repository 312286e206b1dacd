#include "mtmct/synthworld.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

namespace mtmct {

namespace {

using json = nlohmann::ordered_json;

constexpr double kFrameWidth = 1280.0;
constexpr double kFrameHeight = 720.0;
// Box bottoms of the two lanes in each direction.
constexpr double kForwardLanes[2] = {480.0, 545.0};
constexpr double kReverseLanes[2] = {345.0, 410.0};
constexpr double kSideBoxW = 60.0;
constexpr double kSideBoxH = 90.0;
constexpr double kStaticBox = 50.0;
constexpr int kMaxAttempts = 500;

ZonePolygon rect(Zone zone, double x0, double y0, double x1, double y1) {
    return {zone, {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}};
}

std::vector<ZonePolygon> crossroad_layout() {
    return {rect(Zone::side_a, 360, 0, 920, 250), rect(Zone::side_b, 360, 580, 920, 720),
            rect(Zone::toward_next, 960, 300, 1280, 560), rect(Zone::toward_previous, 0, 300, 320, 560)};
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine_); }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
    bool bernoulli(double p) { return std::bernoulli_distribution(p)(engine_); }
    double normal(double sigma) { return sigma > 0.0 ? std::normal_distribution<double>(0.0, sigma)(engine_) : 0.0; }

    Feature gaussian(int dim) {
        Feature v(dim);
        std::normal_distribution<double> n(0.0, 1.0);
        for (int k = 0; k < dim; ++k) v[k] = n(engine_);
        return v;
    }
    Feature unit(int dim) { return gaussian(dim).normalized(); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
};

void validate(const WorldConfig& c) {
    auto require = [](bool ok, const std::string& what) {
        if (!ok) throw ConfigError("world config: " + what);
    };
    require(c.n_cameras >= 1, "n_cameras must be >= 1");
    require(c.n_vehicles >= 0 && c.false_positive_count >= 0 && c.side_road_vehicle_count >= 0,
            "counts must be >= 0");
    require(c.frame_count >= 1, "frame_count must be >= 1");
    require(c.transit_min >= 0 && c.transit_max >= c.transit_min, "transit range must be 0 <= min <= max");
    require(c.embedding_dim >= 2, "embedding_dim must be >= 2");
    require(c.family_size >= 1, "family_size must be >= 1");
    require(c.identity_separation >= 0.0, "identity_separation must be >= 0");
    require(c.per_camera_bias_magnitude >= 0.0 && c.feature_noise_sigma >= 0.0 && c.bbox_noise_sigma >= 0.0,
            "noise magnitudes must be >= 0");
    require(c.detection_drop_rate >= 0.0 && c.detection_drop_rate <= 1.0, "detection_drop_rate must be in [0,1]");
    require(c.reverse_fraction >= 0.0 && c.reverse_fraction <= 1.0, "reverse_fraction must be in [0,1]");
    require(c.min_route_cameras >= 0, "min_route_cameras must be >= 0");
    require(c.speed > 0.0, "speed must be > 0");
    require(c.false_positive_count <= 4 * c.n_cameras, "at most four static false positives per camera");
}

// Identity means grouped in families whose members sit at a fixed pairwise
// angle: member = cos(phi) * anchor + sin(phi) * u_k with orthonormal u_k,
// so member . member' = cos(phi)^2 = cos(separation).
Eigen::MatrixXd identity_means(Rng& rng, int count, const WorldConfig& c) {
    const int d = c.embedding_dim;
    Eigen::MatrixXd means(count, d);
    std::vector<int> order(static_cast<std::size_t>(count));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng.engine());
    const double cos_sep = std::cos(c.identity_separation);
    const bool related = c.family_size > 1 && cos_sep > 0.0;
    const double phi = related ? std::acos(std::sqrt(cos_sep)) : 0.0;

    for (int start = 0; start < count; start += c.family_size) {
        const int end = std::min(count, start + c.family_size);
        const Feature anchor = rng.unit(d);
        std::vector<Feature> basis{anchor};
        for (int k = start; k < end; ++k) {
            Feature row;
            if (!related) {
                row = k == start ? anchor : rng.unit(d);
            } else {
                Feature u = rng.gaussian(d);
                for (const auto& b : basis) u -= u.dot(b) * b;
                u.normalize();
                basis.push_back(u);
                row = std::cos(phi) * anchor + std::sin(phi) * u;
            }
            means.row(order[static_cast<std::size_t>(k)]) = row.normalized().transpose();
        }
    }
    return means;
}

struct Sighting {
    int camera = 0;
    int frame = 0;
    BBox box;
    int appearance = 0;  // row of identity_means
    DetectionTruth truth;
    double confidence = 0.0;
    VehicleClass label = VehicleClass::car;
    bool exact_box = false;
    std::size_t seq = 0;
};

struct LaneEntry {
    int camera_index;
    bool reverse;
    int lane;
    int entry;
};

}  // namespace

std::size_t World::gt_passes() const {
    std::size_t n = 0;
    for (const auto& r : routes) n += r.passes.size();
    return n;
}

WorldConfig stress_preset(const std::string& name) {
    if (name != "stress-v1") throw ConfigError("unknown preset '" + name + "'");
    WorldConfig c;
    c.name = "stress-v1";
    c.n_cameras = 6;
    c.n_vehicles = 40;
    c.frame_count = 1800;
    c.transit_min = 20;
    c.transit_max = 80;
    c.embedding_dim = 64;
    c.identity_separation = 0.2;
    c.family_size = 4;
    c.per_camera_bias_magnitude = 0.5;
    c.feature_noise_sigma = 0.35;
    c.bbox_noise_sigma = 1.5;
    c.false_positive_count = 8;
    c.side_road_vehicle_count = 24;
    c.detection_drop_rate = 0.03;
    c.reverse_fraction = 0.5;
    c.min_route_cameras = 2;
    c.speed = 20.0;
    c.seed = 2021;
    return c;
}

WorldConfig zero_noise_world(int n_cameras, int n_vehicles, std::uint64_t seed) {
    WorldConfig c;
    c.name = "zero-noise";
    c.n_cameras = n_cameras;
    c.n_vehicles = n_vehicles;
    c.seed = seed;
    c.frame_count = 600 + 120 * n_vehicles;
    return c;
}

World generate(const WorldConfig& c) {
    validate(c);
    Rng rng(c.seed);
    World w;
    w.config = c;

    std::vector<int> cameras;
    for (int i = 0; i < c.n_cameras; ++i) cameras.push_back(c.camera_id_base + i);
    w.topology = CameraTopology(cameras);
    for (int cam : cameras) w.zones.emplace(cam, crossroad_layout());

    std::vector<double> scale;
    for (int i = 0; i < c.n_cameras; ++i) scale.push_back(rng.uniform(0.9, 1.1));

    // Appearance rows: main-road vehicles, then side-road vehicles, then the
    // shared look of static distractors.
    const int n_appearance = c.n_vehicles + c.side_road_vehicle_count + 1;
    w.identity_means = identity_means(rng, n_appearance, c);
    const int static_appearance = n_appearance - 1;
    w.camera_bias = Eigen::MatrixXd::Zero(c.n_cameras, c.embedding_dim);
    for (int i = 0; i < c.n_cameras; ++i) {
        w.camera_bias.row(i) = (c.per_camera_bias_magnitude * rng.unit(c.embedding_dim)).transpose();
    }

    std::vector<Sighting> sightings;
    auto add = [&](Sighting s) {
        s.seq = sightings.size();
        sightings.push_back(std::move(s));
    };

    // Main road.
    std::vector<LaneEntry> lane_entries;
    for (int v = 0; v < c.n_vehicles; ++v) {
        const double width = rng.uniform(100.0, 130.0);
        const double height = rng.uniform(55.0, 60.0);
        const auto label = static_cast<VehicleClass>(rng.uniform_int(0, 2));
        const double conf_lo = rng.uniform(0.5, 0.8);

        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            const int min_route = c.min_route_cameras == 0 ? c.n_cameras : std::min(c.min_route_cameras, c.n_cameras);
            const int length = rng.uniform_int(std::min(std::max(2, min_route), c.n_cameras), c.n_cameras);
            const int first = rng.uniform_int(0, c.n_cameras - length);
            const bool reverse = rng.bernoulli(c.reverse_fraction);
            std::vector<int> order;
            for (int k = 0; k < length; ++k) order.push_back(reverse ? first + length - 1 - k : first + k);

            std::vector<int> durations, transits;
            int total = 0;
            for (std::size_t k = 0; k < order.size(); ++k) {
                const double step = c.speed * scale[static_cast<std::size_t>(order[k])];
                durations.push_back(static_cast<int>(std::floor((kFrameWidth - width) / step)) + 1);
                total += durations.back();
                if (k + 1 < order.size()) {
                    transits.push_back(rng.uniform_int(c.transit_min, c.transit_max));
                    total += transits.back();
                }
            }
            if (total > c.frame_count) continue;
            const int t0 = rng.uniform_int(0, c.frame_count - total);

            std::vector<LaneEntry> mine;
            int t = t0;
            bool ok = true;
            for (std::size_t k = 0; k < order.size() && ok; ++k) {
                const int ci = order[k];
                const double step = c.speed * scale[static_cast<std::size_t>(ci)];
                const int headway = static_cast<int>(std::ceil((130.0 + 40.0) / step));
                int lane = -1;
                for (int l = 0; l < 2 && lane < 0; ++l) {
                    const bool free = std::none_of(lane_entries.begin(), lane_entries.end(), [&](const LaneEntry& e) {
                        return e.camera_index == ci && e.reverse == reverse && e.lane == l &&
                               std::abs(e.entry - t) < headway;
                    });
                    if (free) lane = l;
                }
                if (lane < 0) ok = false;
                mine.push_back({ci, reverse, lane, t});
                t += durations[k] + (k < transits.size() ? transits[k] : 0);
            }
            if (!ok) continue;

            VehicleRoute route;
            route.identity = v + 1;
            route.reverse = reverse;
            for (std::size_t k = 0; k < order.size(); ++k) {
                const auto& e = mine[k];
                const double step = c.speed * scale[static_cast<std::size_t>(e.camera_index)];
                const double bottom = reverse ? kReverseLanes[e.lane] : kForwardLanes[e.lane];
                const int cam = cameras[static_cast<std::size_t>(e.camera_index)];
                for (int f = 0; f < durations[k]; ++f) {
                    const double x = reverse ? (kFrameWidth - width) - f * step : f * step;
                    Sighting s;
                    s.camera = cam;
                    s.frame = e.entry + f;
                    s.box = {x, bottom - height, width, height};
                    s.appearance = v;
                    s.truth = {TruthKind::vehicle, v + 1, 1.0};
                    s.confidence = rng.uniform(conf_lo, 0.95);
                    s.label = label;
                    add(s);
                    w.ground_truth.push_back({cam, v + 1, s.frame, s.box});
                }
                route.passes.push_back({cam, e.entry, e.entry + durations[k] - 1, reverse});
                lane_entries.push_back(e);
            }
            w.routes.push_back(std::move(route));
            placed = true;
        }
        if (!placed) {
            throw ConfigError("world config: infeasible geometry, cannot schedule vehicle " +
                              std::to_string(v + 1) + " without overlap");
        }
    }

    // Side road: vertical crossings between zones 1 and 2 of a single camera.
    std::vector<std::tuple<int, int, int>> side_busy;  // camera index, start, end
    for (int k = 0; k < c.side_road_vehicle_count; ++k) {
        const auto label = static_cast<VehicleClass>(rng.uniform_int(0, 2));
        bool placed = false;
        for (int attempt = 0; attempt < kMaxAttempts && !placed; ++attempt) {
            const int ci = rng.uniform_int(0, c.n_cameras - 1);
            const bool downward = rng.bernoulli(0.5);
            const double column = rng.uniform(540.0, 680.0);
            const double step = 15.0 * scale[static_cast<std::size_t>(ci)];
            const double travel = kFrameHeight - kSideBoxH;
            const int duration = static_cast<int>(std::floor(travel / step)) + 1;
            if (duration > c.frame_count) break;
            const int t0 = rng.uniform_int(0, c.frame_count - duration);
            const bool clash = std::any_of(side_busy.begin(), side_busy.end(), [&](const auto& b) {
                return std::get<0>(b) == ci && t0 <= std::get<2>(b) + 5 && std::get<1>(b) <= t0 + duration + 5;
            });
            if (clash) continue;
            side_busy.emplace_back(ci, t0, t0 + duration - 1);
            for (int f = 0; f < duration; ++f) {
                const double y = downward ? f * step : travel - f * step;
                Sighting s;
                s.camera = cameras[static_cast<std::size_t>(ci)];
                s.frame = t0 + f;
                s.box = {column, y, kSideBoxW, kSideBoxH};
                s.appearance = c.n_vehicles + k;
                s.truth = {TruthKind::side_road, -(1000 + k), 1.0};
                s.confidence = rng.uniform(0.5, 0.95);
                s.label = label;
                add(s);
            }
            placed = true;
        }
        if (!placed) {
            throw ConfigError("world config: infeasible geometry, cannot schedule side-road vehicle " +
                              std::to_string(k + 1));
        }
    }

    // Static distractors: one per (camera, slot), constant box, never moving.
    {
        std::vector<int> slots(static_cast<std::size_t>(4 * c.n_cameras));
        std::iota(slots.begin(), slots.end(), 0);
        std::shuffle(slots.begin(), slots.end(), rng.engine());
        for (int k = 0; k < c.false_positive_count; ++k) {
            const int slot = slots[static_cast<std::size_t>(k)];
            const int ci = slot / 4;
            const bool top = (slot % 4) < 2;
            const bool left = (slot % 2) == 0;
            const double x = left ? rng.uniform(380.0, 460.0) : rng.uniform(780.0, 850.0);
            const double y = top ? rng.uniform(120.0, 190.0) : rng.uniform(600.0, 660.0);
            const int length = std::max(1, rng.uniform_int(c.frame_count / 4, std::max(c.frame_count / 4, c.frame_count / 2)));
            const int start = rng.uniform_int(0, std::max(0, c.frame_count - length));
            for (int f = start; f < std::min(c.frame_count, start + length); ++f) {
                Sighting s;
                s.camera = cameras[static_cast<std::size_t>(ci)];
                s.frame = f;
                s.box = {x, y, kStaticBox, kStaticBox};
                s.appearance = static_appearance;
                s.truth = {TruthKind::static_false_positive, -(1 + k), 1.0};
                s.confidence = rng.uniform(0.3, 0.6);
                s.label = VehicleClass::car;
                s.exact_box = true;
                add(s);
            }
        }
    }

    std::sort(sightings.begin(), sightings.end(), [](const Sighting& a, const Sighting& b) {
        return std::tie(a.camera, a.frame, a.seq) < std::tie(b.camera, b.frame, b.seq);
    });
    std::map<int, int> camera_index;
    for (int i = 0; i < c.n_cameras; ++i) camera_index[cameras[static_cast<std::size_t>(i)]] = i;

    const double component_sigma = c.feature_noise_sigma / std::sqrt(static_cast<double>(c.embedding_dim));
    for (const auto& s : sightings) {
        if (c.detection_drop_rate > 0.0 && rng.bernoulli(c.detection_drop_rate)) continue;
        BBox box = s.box;
        if (!s.exact_box && c.bbox_noise_sigma > 0.0) {
            box.x += rng.normal(c.bbox_noise_sigma);
            box.y += rng.normal(c.bbox_noise_sigma);
            box.w = std::max(1.0, box.w + rng.normal(c.bbox_noise_sigma));
            box.h = std::max(1.0, box.h + rng.normal(c.bbox_noise_sigma));
        }
        Feature raw = w.identity_means.row(s.appearance).transpose() +
                      w.camera_bias.row(camera_index.at(s.camera)).transpose();
        if (component_sigma > 0.0) {
            for (int k = 0; k < c.embedding_dim; ++k) raw[k] += rng.normal(component_sigma);
        }
        Detection d;
        d.camera_id = s.camera;
        d.frame = s.frame;
        d.bbox = box;
        d.confidence = s.confidence;
        d.label = s.label;
        d.row = w.detections.size();
        const double norm = raw.norm();
        d.feature = raw / norm;
        DetectionTruth truth = s.truth;
        truth.raw_norm = norm;
        w.detections.push_back(std::move(d));
        w.truth.push_back(truth);
    }
    std::stable_sort(w.ground_truth.begin(), w.ground_truth.end(), [](const SubmissionRow& a, const SubmissionRow& b) {
        return std::tie(a.camera_id, a.frame, a.global_id) < std::tie(b.camera_id, b.frame, b.global_id);
    });
    return w;
}

WorldConfig world_config_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("world config: invalid JSON: ") + e.what());
    }
    if (doc.contains("preset")) {
        WorldConfig base = stress_preset(doc.at("preset").get<std::string>());
        doc.erase("preset");
        json merged = json::parse(world_config_to_json(base));
        merged.update(doc);
        doc = merged;
    }
    WorldConfig c;
    try {
        c.name = doc.value("name", c.name);
        c.n_cameras = doc.value("n_cameras", c.n_cameras);
        c.n_vehicles = doc.value("n_vehicles", c.n_vehicles);
        c.frame_count = doc.value("frame_count", c.frame_count);
        c.transit_min = doc.value("transit_min", c.transit_min);
        c.transit_max = doc.value("transit_max", c.transit_max);
        c.embedding_dim = doc.value("embedding_dim", c.embedding_dim);
        c.identity_separation = doc.value("identity_separation", c.identity_separation);
        c.family_size = doc.value("family_size", c.family_size);
        c.per_camera_bias_magnitude = doc.value("per_camera_bias_magnitude", c.per_camera_bias_magnitude);
        c.feature_noise_sigma = doc.value("feature_noise_sigma", c.feature_noise_sigma);
        c.bbox_noise_sigma = doc.value("bbox_noise_sigma", c.bbox_noise_sigma);
        c.false_positive_count = doc.value("false_positive_count", c.false_positive_count);
        c.side_road_vehicle_count = doc.value("side_road_vehicle_count", c.side_road_vehicle_count);
        c.detection_drop_rate = doc.value("detection_drop_rate", c.detection_drop_rate);
        c.reverse_fraction = doc.value("reverse_fraction", c.reverse_fraction);
        c.min_route_cameras = doc.value("min_route_cameras", c.min_route_cameras);
        c.speed = doc.value("speed", c.speed);
        c.camera_id_base = doc.value("camera_id_base", c.camera_id_base);
        c.seed = doc.value("seed", c.seed);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("world config: ") + e.what());
    }
    return c;
}

std::string world_config_to_json(const WorldConfig& c) {
    json doc;
    doc["name"] = c.name;
    doc["n_cameras"] = c.n_cameras;
    doc["n_vehicles"] = c.n_vehicles;
    doc["frame_count"] = c.frame_count;
    doc["transit_min"] = c.transit_min;
    doc["transit_max"] = c.transit_max;
    doc["embedding_dim"] = c.embedding_dim;
    doc["identity_separation"] = c.identity_separation;
    doc["family_size"] = c.family_size;
    doc["per_camera_bias_magnitude"] = c.per_camera_bias_magnitude;
    doc["feature_noise_sigma"] = c.feature_noise_sigma;
    doc["bbox_noise_sigma"] = c.bbox_noise_sigma;
    doc["false_positive_count"] = c.false_positive_count;
    doc["side_road_vehicle_count"] = c.side_road_vehicle_count;
    doc["detection_drop_rate"] = c.detection_drop_rate;
    doc["reverse_fraction"] = c.reverse_fraction;
    doc["min_route_cameras"] = c.min_route_cameras;
    doc["speed"] = c.speed;
    doc["camera_id_base"] = c.camera_id_base;
    doc["seed"] = c.seed;
    return doc.dump(2);
}

WorldFiles world_files(const std::filesystem::path& dir) {
    return {dir / "detections.txt", dir / "features.txt", dir / "zones.json",
            dir / "topology.json", dir / "gt.txt",         dir / "manifest.json"};
}

WorldFiles write_world(const World& world, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto files = world_files(dir);
    write_detections(world.detections, files.detections, files.features);
    write_zone_map(world.zones, files.zones);
    write_topology(world.topology, files.topology);
    write_submission(world.ground_truth, files.ground_truth);

    json manifest;
    manifest["config"] = json::parse(world_config_to_json(world.config));
    manifest["files"] = {{"detections", files.detections.filename().string()},
                         {"features", files.features.filename().string()},
                         {"zones", files.zones.filename().string()},
                         {"topology", files.topology.filename().string()},
                         {"ground_truth", files.ground_truth.filename().string()}};
    manifest["counts"] = {{"detections", world.detections.size()},
                          {"gt_rows", world.ground_truth.size()},
                          {"gt_passes", world.gt_passes()}};
    write_text_file(files.manifest, manifest.dump(2) + "\n");
    return files;
}

}  // namespace mtmct
