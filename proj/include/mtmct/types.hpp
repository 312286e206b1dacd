#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mtmct {

/// Appearance embedding. Stored L2-normalized once ingested.
using Feature = Eigen::VectorXd;

/// Axis-aligned box in pixels, top-left anchored.
struct BBox {
    double x = 0.0;
    double y = 0.0;
    double w = 0.0;
    double h = 0.0;

    double area() const { return w * h; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }
    bool valid() const { return w > 0.0 && h > 0.0; }

    friend bool operator==(const BBox&, const BBox&) = default;
};

enum class VehicleClass { car, truck, bus };

std::string to_string(VehicleClass label);
VehicleClass vehicle_class_from_string(const std::string& text);

/// One camera-frame observation as delivered by the detector.
struct Detection {
    int camera_id = 0;
    int frame = 0;
    BBox bbox;
    double confidence = 0.0;
    Feature feature;
    VehicleClass label = VehicleClass::car;
    /// Row in the ingested detection/feature files.
    std::size_t row = 0;
};

/// A (time, box, feature) triple of a tracklet.
struct TrackletObservation {
    int t = 0;
    BBox box;
    Feature feature;
    std::size_t row = 0;
};

/// Crossroad zone semantics. Side-road zones cross the main road; the other
/// two lead along the main road to the neighbouring cameras.
enum class Zone : int {
    side_a = 1,
    side_b = 2,
    toward_next = 3,
    toward_previous = 4,
};

inline int label_of(Zone zone) { return static_cast<int>(zone); }
Zone zone_from_label(int label);

inline bool is_side_road(Zone zone) { return zone == Zone::side_a || zone == Zone::side_b; }

struct TrackletEndpoints {
    Zone start_zone = Zone::side_a;
    Zone end_zone = Zone::side_a;
    int start_frame = 0;
    int end_frame = 0;

    friend bool operator==(const TrackletEndpoints&, const TrackletEndpoints&) = default;
};

/// Per-camera identity produced by single-camera tracking.
struct Tracklet {
    int camera_id = 0;
    int local_id = 0;
    std::vector<TrackletObservation> observations;
    /// Empty until zones are assigned, and for tracklets that never touch a zone.
    std::optional<TrackletEndpoints> endpoints;

    int first_frame() const { return observations.front().t; }
    int last_frame() const { return observations.back().t; }
};

/// Cameras in driving order along the main road.
class CameraTopology {
public:
    CameraTopology() = default;
    explicit CameraTopology(std::vector<int> cameras);

    const std::vector<int>& cameras() const { return cameras_; }
    std::size_t size() const { return cameras_.size(); }
    bool contains(int camera_id) const;
    /// Position along the road; throws for unknown cameras.
    std::size_t index_of(int camera_id) const;

    friend bool operator==(const CameraTopology&, const CameraTopology&) = default;

private:
    std::vector<int> cameras_;
};

struct Point {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Point&, const Point&) = default;
};

struct ZonePolygon {
    Zone zone = Zone::side_a;
    std::vector<Point> vertices;
};

/// Zone polygons per camera id, each camera carrying all four labels
/// ordered by label.
using ZoneMap = std::map<int, std::vector<ZonePolygon>>;

struct GlobalTrajectory {
    int global_id = 0;
    std::vector<Tracklet> members;
};

/// Base for all recoverable failures raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

}  // namespace mtmct
