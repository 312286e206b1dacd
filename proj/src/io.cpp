#include "mtmct/io.hpp"

#include "polygon.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace mtmct {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::string to_string(VehicleClass label) {
    switch (label) {
        case VehicleClass::car: return "car";
        case VehicleClass::truck: return "truck";
        case VehicleClass::bus: return "bus";
    }
    return "car";
}

VehicleClass vehicle_class_from_string(const std::string& text) {
    if (text == "car") return VehicleClass::car;
    if (text == "truck") return VehicleClass::truck;
    if (text == "bus") return VehicleClass::bus;
    throw Error("unknown vehicle class '" + text + "'");
}

Zone zone_from_label(int label) {
    if (label < 1 || label > 4) {
        throw Error("zone label out of range: " + std::to_string(label));
    }
    return static_cast<Zone>(label);
}

CameraTopology::CameraTopology(std::vector<int> cameras) : cameras_(std::move(cameras)) {
    if (cameras_.empty()) {
        throw ConfigError("camera topology is empty");
    }
    std::set<int> seen;
    for (int c : cameras_) {
        if (!seen.insert(c).second) {
            throw ConfigError("camera " + std::to_string(c) + " appears twice in topology");
        }
    }
}

bool CameraTopology::contains(int camera_id) const {
    return std::find(cameras_.begin(), cameras_.end(), camera_id) != cameras_.end();
}

std::size_t CameraTopology::index_of(int camera_id) const {
    auto it = std::find(cameras_.begin(), cameras_.end(), camera_id);
    if (it == cameras_.end()) {
        throw ConfigError("camera " + std::to_string(camera_id) + " is not in the topology");
    }
    return static_cast<std::size_t>(it - cameras_.begin());
}

ParseError::ParseError(const std::string& path, std::size_t line, const std::string& what)
    : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

Feature l2_normalized(const Feature& x) {
    const double norm = x.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw DimensionError("cannot normalize a zero or non-finite vector");
    }
    return x / norm;
}

std::string format_real(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

std::string read_text_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write " + path.string());
    }
    out << content;
    if (!out) {
        throw Error("write failed for " + path.string());
    }
}

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
        while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        std::size_t j = i;
        while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
        if (j > i) out.push_back(line.substr(i, j - i));
        i = j;
    }
    return out;
}

template <typename T>
bool parse_number(std::string_view token, T& out) {
    auto res = std::from_chars(token.data(), token.data() + token.size(), out);
    if (res.ec != std::errc() || res.ptr != token.data() + token.size()) return false;
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(out)) return false;
    }
    return true;
}

class LineReader {
public:
    explicit LineReader(const fs::path& path) : path_(path), in_(path) {
        if (!in_) throw Error("cannot open " + path.string());
    }

    /// Next non-blank line; false at end of file.
    bool next(std::string& line) {
        while (std::getline(in_, line)) {
            ++number_;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    }

    std::size_t number() const { return number_; }
    [[noreturn]] void fail(const std::string& what) const {
        throw ParseError(path_.string(), number_, what);
    }

private:
    fs::path path_;
    std::ifstream in_;
    std::size_t number_ = 0;
};

void write_lines(const fs::path& path, const std::string& content) { write_text_file(path, content); }

}  // namespace

std::vector<Detection> parse_detections(const fs::path& detections_path,
                                        const fs::path& features_path, std::size_t dim) {
    LineReader dets(detections_path);
    LineReader feats(features_path);
    std::vector<Detection> out;
    std::string line;
    std::string feature_line;
    while (dets.next(line)) {
        auto tok = split_ws(line);
        if (tok.size() != 8) {
            dets.fail("expected 8 fields 'camera frame x y w h confidence class', got " +
                      std::to_string(tok.size()));
        }
        Detection d;
        d.row = out.size();
        if (!parse_number(tok[0], d.camera_id)) dets.fail("bad camera id");
        if (!parse_number(tok[1], d.frame) || d.frame < 0) dets.fail("bad frame index");
        if (!parse_number(tok[2], d.bbox.x) || !parse_number(tok[3], d.bbox.y) ||
            !parse_number(tok[4], d.bbox.w) || !parse_number(tok[5], d.bbox.h)) {
            dets.fail("bad bbox");
        }
        if (!d.bbox.valid()) {
            dets.fail("non-positive bbox size in detection row " + std::to_string(d.row));
        }
        if (!parse_number(tok[6], d.confidence) || d.confidence < 0.0 || d.confidence > 1.0) {
            dets.fail("confidence must be a real in [0,1]");
        }
        try {
            d.label = vehicle_class_from_string(std::string(tok[7]));
        } catch (const Error& e) {
            dets.fail(e.what());
        }

        if (!feats.next(feature_line)) {
            feats.fail("missing feature row for detection row " + std::to_string(d.row));
        }
        auto ftok = split_ws(feature_line);
        if (dim == 0) dim = ftok.size();
        if (ftok.size() != dim) {
            throw DimensionError(features_path.string() + ":" + std::to_string(feats.number()) +
                                 ": feature dimension " + std::to_string(ftok.size()) +
                                 " does not match expected " + std::to_string(dim));
        }
        Feature f(static_cast<Eigen::Index>(dim));
        for (std::size_t k = 0; k < dim; ++k) {
            if (!parse_number(ftok[k], f[static_cast<Eigen::Index>(k)])) feats.fail("bad feature value");
        }
        try {
            d.feature = l2_normalized(f);
        } catch (const DimensionError&) {
            feats.fail("zero feature vector");
        }
        out.push_back(std::move(d));
    }
    if (feats.next(feature_line)) {
        feats.fail("more feature rows than detections");
    }
    return out;
}

void write_detections(const std::vector<Detection>& detections, const fs::path& detections_path,
                      const fs::path& features_path) {
    std::string det_text;
    std::string feat_text;
    for (const auto& d : detections) {
        det_text += std::to_string(d.camera_id) + ' ' + std::to_string(d.frame) + ' ' +
                    format_real(d.bbox.x) + ' ' + format_real(d.bbox.y) + ' ' +
                    format_real(d.bbox.w) + ' ' + format_real(d.bbox.h) + ' ' +
                    format_real(d.confidence) + ' ' + to_string(d.label) + '\n';
        for (Eigen::Index k = 0; k < d.feature.size(); ++k) {
            if (k > 0) feat_text += ' ';
            feat_text += format_real(d.feature[k]);
        }
        feat_text += '\n';
    }
    write_lines(detections_path, det_text);
    write_lines(features_path, feat_text);
}

namespace {

std::vector<Point> parse_polygon(const json& value, const std::string& where) {
    if (!value.is_array()) throw ConfigError(where + ": polygon must be an array of [x,y]");
    std::vector<Point> vertices;
    for (const auto& v : value) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            throw ConfigError(where + ": vertex must be [x,y]");
        }
        vertices.push_back({v[0].get<double>(), v[1].get<double>()});
    }
    if (vertices.size() > 1 && vertices.front() == vertices.back()) {
        vertices.pop_back();
    }
    if (vertices.size() < 3) {
        throw ConfigError(where + ": polygon needs at least 3 vertices");
    }
    const auto polygon = detail::to_boost(vertices);
    if (!detail::bg::is_valid(polygon)) {
        throw ConfigError(where + ": polygon is not simple");
    }
    return vertices;
}

}  // namespace

ZoneMap zone_map_from_json(const std::string& text, const std::string& origin) {
    // Track keys per object so duplicate zone labels are rejected instead of
    // silently overwritten.
    std::vector<std::set<std::string>> keys;
    std::string duplicate;
    json::parser_callback_t cb = [&](int depth, json::parse_event_t event, json& parsed) {
        switch (event) {
            case json::parse_event_t::object_start: keys.emplace_back(); break;
            case json::parse_event_t::object_end: keys.pop_back(); break;
            case json::parse_event_t::key:
                if (!keys.back().insert(parsed.get<std::string>()).second && duplicate.empty()) {
                    duplicate = "duplicate key '" + parsed.get<std::string>() + "' at depth " +
                                std::to_string(depth);
                }
                break;
            default: break;
        }
        return true;
    };
    json doc;
    try {
        doc = json::parse(text, cb);
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": invalid zone map JSON: " + e.what());
    }
    if (!duplicate.empty()) throw ConfigError(origin + ": " + duplicate);
    if (!doc.is_object()) throw ConfigError(origin + ": zone map must be a JSON object");

    ZoneMap zones;
    for (const auto& [cam_key, labels] : doc.items()) {
        int camera = 0;
        if (!parse_number(std::string_view(cam_key), camera)) {
            throw ConfigError(origin + ": camera key '" + cam_key + "' is not an integer");
        }
        if (!labels.is_object()) {
            throw ConfigError(origin + ": camera " + cam_key + " must map labels to polygons");
        }
        std::vector<ZonePolygon> polygons;
        for (int label = 1; label <= 4; ++label) {
            const std::string key = std::to_string(label);
            if (!labels.contains(key)) {
                throw ConfigError(origin + ": camera " + cam_key + " is missing zone label " + key);
            }
            polygons.push_back({zone_from_label(label),
                                parse_polygon(labels.at(key), origin + ": camera " + cam_key +
                                                                  " zone " + key)});
        }
        if (labels.size() != 4) {
            throw ConfigError(origin + ": camera " + cam_key + " has labels other than 1..4");
        }
        zones.emplace(camera, std::move(polygons));
    }
    return zones;
}

ZoneMap parse_zone_map(const fs::path& path) {
    return zone_map_from_json(read_text_file(path), path.string());
}

void write_zone_map(const ZoneMap& zones, const fs::path& path) {
    json doc = json::object();
    for (const auto& [camera, polygons] : zones) {
        json labels = json::object();
        for (const auto& p : polygons) {
            json pts = json::array();
            for (const auto& v : p.vertices) pts.push_back({v.x, v.y});
            labels[std::to_string(label_of(p.zone))] = pts;
        }
        doc[std::to_string(camera)] = labels;
    }
    write_text_file(path, doc.dump(2) + "\n");
}

CameraTopology parse_topology(const fs::path& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw ConfigError(path.string() + ": invalid topology JSON: " + e.what());
    }
    if (!doc.is_array()) throw ConfigError(path.string() + ": topology must be an array");
    std::vector<int> cameras;
    for (const auto& c : doc) {
        if (!c.is_number_integer()) throw ConfigError(path.string() + ": camera ids must be integers");
        cameras.push_back(c.get<int>());
    }
    return CameraTopology(std::move(cameras));
}

void write_topology(const CameraTopology& topology, const fs::path& path) {
    write_text_file(path, json(topology.cameras()).dump() + "\n");
}

std::vector<SubmissionRow> to_submission_rows(const std::vector<GlobalTrajectory>& trajectories) {
    std::vector<SubmissionRow> rows;
    for (const auto& traj : trajectories) {
        for (const auto& member : traj.members) {
            for (const auto& obs : member.observations) {
                rows.push_back({member.camera_id, traj.global_id, obs.t, obs.box});
            }
        }
    }
    std::stable_sort(rows.begin(), rows.end(), [](const SubmissionRow& a, const SubmissionRow& b) {
        return std::tie(a.camera_id, a.frame, a.global_id) < std::tie(b.camera_id, b.frame, b.global_id);
    });
    return rows;
}

std::vector<SubmissionRow> parse_submission(const fs::path& path) {
    LineReader reader(path);
    std::vector<SubmissionRow> rows;
    std::string line;
    while (reader.next(line)) {
        auto tok = split_ws(line);
        if (tok.size() != 9) {
            reader.fail("expected 9 fields 'camera id frame x y w h -1 -1', got " +
                        std::to_string(tok.size()));
        }
        SubmissionRow r;
        if (!parse_number(tok[0], r.camera_id)) reader.fail("bad camera id");
        if (!parse_number(tok[1], r.global_id)) reader.fail("bad global id");
        if (!parse_number(tok[2], r.frame) || r.frame < 0) reader.fail("bad frame index");
        if (!parse_number(tok[3], r.bbox.x) || !parse_number(tok[4], r.bbox.y) ||
            !parse_number(tok[5], r.bbox.w) || !parse_number(tok[6], r.bbox.h)) {
            reader.fail("bad bbox");
        }
        if (!r.bbox.valid()) reader.fail("non-positive bbox size");
        if (tok[7] != "-1" || tok[8] != "-1") reader.fail("world-coordinate placeholders must be -1 -1");
        rows.push_back(r);
    }
    return rows;
}

void write_submission(const std::vector<SubmissionRow>& rows, const fs::path& path) {
    std::string text;
    for (const auto& r : rows) {
        text += std::to_string(r.camera_id) + ' ' + std::to_string(r.global_id) + ' ' +
                std::to_string(r.frame) + ' ' + format_real(r.bbox.x) + ' ' +
                format_real(r.bbox.y) + ' ' + format_real(r.bbox.w) + ' ' +
                format_real(r.bbox.h) + " -1 -1\n";
    }
    write_text_file(path, text);
}

void emit_submission(const std::vector<GlobalTrajectory>& trajectories, const fs::path& path) {
    write_submission(to_submission_rows(trajectories), path);
}

void write_tracklets(const std::vector<Tracklet>& tracklets, const fs::path& path) {
    std::string text;
    for (const auto& t : tracklets) {
        json obs = json::array();
        for (const auto& o : t.observations) {
            obs.push_back({{"t", o.t},
                           {"bbox", {o.box.x, o.box.y, o.box.w, o.box.h}},
                           {"feature_index", o.row}});
        }
        json line = {{"camera", t.camera_id}, {"local_id", t.local_id}, {"obs", obs}};
        text += line.dump() + '\n';
    }
    write_text_file(path, text);
}

std::vector<Tracklet> read_tracklets(const fs::path& path, const std::vector<Detection>& detections) {
    LineReader reader(path);
    std::vector<Tracklet> out;
    std::string line;
    while (reader.next(line)) {
        json doc;
        try {
            doc = json::parse(line);
            Tracklet t;
            t.camera_id = doc.at("camera").get<int>();
            t.local_id = doc.at("local_id").get<int>();
            for (const auto& o : doc.at("obs")) {
                TrackletObservation obs;
                obs.t = o.at("t").get<int>();
                const auto& b = o.at("bbox");
                obs.box = {b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<double>(),
                           b.at(3).get<double>()};
                obs.row = o.at("feature_index").get<std::size_t>();
                if (obs.row >= detections.size()) reader.fail("feature_index out of range");
                obs.feature = detections[obs.row].feature;
                if (!t.observations.empty() && obs.t <= t.observations.back().t) {
                    reader.fail("observation times must strictly increase");
                }
                t.observations.push_back(std::move(obs));
            }
            if (t.observations.empty()) reader.fail("tracklet without observations");
            out.push_back(std::move(t));
        } catch (const json::exception& e) {
            reader.fail(std::string("invalid tracklet record: ") + e.what());
        }
    }
    return out;
}

}  // namespace mtmct
