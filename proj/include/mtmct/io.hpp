#pragma once

#include "mtmct/types.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace mtmct {

// Text formats
//
//   detections   camera_id frame x y w h confidence class        (one per line)
//   features     d space-separated reals per line, same order as detections
//   zones        {"<camera_id>": {"1": [[x,y],...], "2": ..., "3": ..., "4": ...}}
//   topology     [camera_id, ...] in driving order
//   submission   camera_id global_id frame x y w h -1 -1
//
// Frames are 0-based. Reals are written in shortest round-trip form, so
// parse(emit(x)) == x for every well-formed value.

/// Returns x / ||x||; throws DimensionError on a zero vector.
Feature l2_normalized(const Feature& x);

/// Reads detections with their companion feature rows. `dim` of 0 accepts
/// the dimension of the first feature row; any other value is enforced.
std::vector<Detection> parse_detections(const std::filesystem::path& detections,
                                        const std::filesystem::path& features,
                                        std::size_t dim = 0);

void write_detections(const std::vector<Detection>& detections,
                      const std::filesystem::path& detections_path,
                      const std::filesystem::path& features_path);

ZoneMap parse_zone_map(const std::filesystem::path& path);
ZoneMap zone_map_from_json(const std::string& text, const std::string& origin = "<memory>");
void write_zone_map(const ZoneMap& zones, const std::filesystem::path& path);

CameraTopology parse_topology(const std::filesystem::path& path);
void write_topology(const CameraTopology& topology, const std::filesystem::path& path);

struct SubmissionRow {
    int camera_id = 0;
    int global_id = 0;
    int frame = 0;
    BBox bbox;

    friend bool operator==(const SubmissionRow&, const SubmissionRow&) = default;
};

/// Flattens trajectories into rows sorted by camera, frame, then id.
std::vector<SubmissionRow> to_submission_rows(const std::vector<GlobalTrajectory>& trajectories);

std::vector<SubmissionRow> parse_submission(const std::filesystem::path& path);
void write_submission(const std::vector<SubmissionRow>& rows, const std::filesystem::path& path);
void emit_submission(const std::vector<GlobalTrajectory>& trajectories,
                     const std::filesystem::path& path);

/// Tracklet dump, one JSON object per line:
///   {"camera":c,"local_id":i,"obs":[{"t":..,"bbox":[x,y,w,h],"feature_index":row},...]}
/// Features are referenced by row in the ingested feature file.
void write_tracklets(const std::vector<Tracklet>& tracklets, const std::filesystem::path& path);
std::vector<Tracklet> read_tracklets(const std::filesystem::path& path,
                                     const std::vector<Detection>& detections);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_real(double value);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace mtmct
