#pragma once

#include "mtmct/types.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

namespace mtmct {

/// Point where a vehicle touches the road: bottom-center of its box.
Point anchor_point(const BBox& box);

/// Zone containing the box anchor, boundary inclusive. When several zones
/// contain it the lowest label wins.
std::optional<Zone> assign_zone(const BBox& box, const std::vector<ZonePolygon>& camera_zones);

/// Start/end zone come from the first/last observation that lies in a zone;
/// start/end frame from the first/last observation. Empty when the
/// tracklet never touches a zone.
std::optional<TrackletEndpoints> compute_endpoints(const Tracklet& tracklet,
                                                   const std::vector<ZonePolygon>& camera_zones);

/// Fills endpoints for every tracklet whose camera appears in `zones`.
void assign_endpoints(std::vector<Tracklet>& tracklets, const ZoneMap& zones);

/// True when the tracklet survives the filter: it has endpoints, changes
/// zone, and is not a pure side-road crossing.
bool passes_tfs(const Tracklet& tracklet);

std::vector<Tracklet> tfs_filter(const std::vector<Tracklet>& tracklets);

/// Conflict-table test, applied to both orderings of the pair. Tracklets on
/// the same camera, or without endpoints, never conflict here.
bool conflict(const Tracklet& a, const Tracklet& b, const CameraTopology& topology);

/// 0/1 matchability matrix; entry 0 iff the pair conflicts.
using MaskMatrix = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

MaskMatrix build_dbtm(const std::vector<Tracklet>& tracklets, const CameraTopology& topology);

/// All-ones mask, used when the direction mask is disabled.
MaskMatrix unit_mask(std::size_t n);

void write_mask_csv(const MaskMatrix& mask, const std::filesystem::path& path);

}  // namespace mtmct
