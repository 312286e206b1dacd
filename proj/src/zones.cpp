#include "mtmct/zones.hpp"

#include "mtmct/io.hpp"
#include "polygon.hpp"

#include <string>

namespace mtmct {

Point anchor_point(const BBox& box) { return {box.x + box.w / 2.0, box.y + box.h}; }

std::optional<Zone> assign_zone(const BBox& box, const std::vector<ZonePolygon>& camera_zones) {
    const Point anchor = anchor_point(box);
    std::optional<Zone> best;
    for (const auto& zp : camera_zones) {
        if (best && label_of(zp.zone) >= label_of(*best)) continue;
        if (detail::covers(detail::to_boost(zp.vertices), anchor)) best = zp.zone;
    }
    return best;
}

std::optional<TrackletEndpoints> compute_endpoints(const Tracklet& tracklet,
                                                   const std::vector<ZonePolygon>& camera_zones) {
    std::vector<std::pair<Zone, detail::BgPolygon>> polygons;
    for (const auto& zp : camera_zones) polygons.emplace_back(zp.zone, detail::to_boost(zp.vertices));
    auto zone_of = [&](const BBox& box) -> std::optional<Zone> {
        const Point anchor = anchor_point(box);
        std::optional<Zone> best;
        for (const auto& [zone, polygon] : polygons) {
            if (best && label_of(zone) >= label_of(*best)) continue;
            if (detail::covers(polygon, anchor)) best = zone;
        }
        return best;
    };

    std::optional<Zone> first, last;
    for (const auto& obs : tracklet.observations) {
        if (auto z = zone_of(obs.box)) {
            first = *z;
            break;
        }
    }
    if (!first) return std::nullopt;
    for (auto it = tracklet.observations.rbegin(); it != tracklet.observations.rend(); ++it) {
        if (auto z = zone_of(it->box)) {
            last = *z;
            break;
        }
    }
    return TrackletEndpoints{*first, *last, tracklet.first_frame(), tracklet.last_frame()};
}

void assign_endpoints(std::vector<Tracklet>& tracklets, const ZoneMap& zones) {
    for (auto& t : tracklets) {
        auto it = zones.find(t.camera_id);
        t.endpoints = it == zones.end() ? std::nullopt : compute_endpoints(t, it->second);
    }
}

bool passes_tfs(const Tracklet& tracklet) {
    if (!tracklet.endpoints) return false;
    const auto& e = *tracklet.endpoints;
    if (e.start_zone == e.end_zone) return false;
    if (is_side_road(e.start_zone) && is_side_road(e.end_zone)) return false;
    return true;
}

std::vector<Tracklet> tfs_filter(const std::vector<Tracklet>& tracklets) {
    std::vector<Tracklet> kept;
    for (const auto& t : tracklets) {
        if (passes_tfs(t)) kept.push_back(t);
    }
    return kept;
}

namespace {

// Rows of the conflict table for the ordered pair (i, j).
bool ordered_conflict(const TrackletEndpoints& i, std::size_t ci, const TrackletEndpoints& j,
                      std::size_t cj) {
    switch (i.start_zone) {
        case Zone::side_a:
        case Zone::side_b:
            if (j.end_frame < i.start_frame) return true;
            break;
        case Zone::toward_next:
            if (cj > ci && j.end_frame > i.start_frame) return true;
            break;
        case Zone::toward_previous:
            if (cj < ci && j.end_frame > i.start_frame) return true;
            break;
    }
    switch (i.end_zone) {
        case Zone::side_a:
        case Zone::side_b:
            if (j.start_frame > i.end_frame) return true;
            break;
        case Zone::toward_next:
            if (cj > ci && j.start_frame < i.end_frame) return true;
            break;
        case Zone::toward_previous:
            if (cj < ci && j.start_frame < i.end_frame) return true;
            break;
    }
    return false;
}

}  // namespace

bool conflict(const Tracklet& a, const Tracklet& b, const CameraTopology& topology) {
    if (a.camera_id == b.camera_id || !a.endpoints || !b.endpoints) return false;
    const std::size_t ca = topology.index_of(a.camera_id);
    const std::size_t cb = topology.index_of(b.camera_id);
    return ordered_conflict(*a.endpoints, ca, *b.endpoints, cb) ||
           ordered_conflict(*b.endpoints, cb, *a.endpoints, ca);
}

MaskMatrix build_dbtm(const std::vector<Tracklet>& tracklets, const CameraTopology& topology) {
    const auto m = static_cast<Eigen::Index>(tracklets.size());
    MaskMatrix mask = MaskMatrix::Ones(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = i + 1; j < m; ++j) {
            if (conflict(tracklets[static_cast<std::size_t>(i)], tracklets[static_cast<std::size_t>(j)],
                         topology)) {
                mask(i, j) = 0;
                mask(j, i) = 0;
            }
        }
    }
    return mask;
}

MaskMatrix unit_mask(std::size_t n) {
    return MaskMatrix::Ones(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

void write_mask_csv(const MaskMatrix& mask, const std::filesystem::path& path) {
    std::string text;
    for (Eigen::Index i = 0; i < mask.rows(); ++i) {
        for (Eigen::Index j = 0; j < mask.cols(); ++j) {
            if (j > 0) text += ',';
            text += mask(i, j) ? '1' : '0';
        }
        text += '\n';
    }
    write_text_file(path, text);
}

}  // namespace mtmct
