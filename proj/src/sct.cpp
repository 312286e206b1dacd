#include "mtmct/sct.hpp"

#include "mtmct/io.hpp"

#include <algorithm>
#include <map>
#include <numeric>

namespace mtmct {

std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thresh, double conf_thresh) {
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (dets[i].confidence >= conf_thresh) order.push_back(i);
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dets[a].confidence > dets[b].confidence;
    });
    std::vector<bool> keep(dets.size(), false);
    std::vector<bool> suppressed(dets.size(), false);
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t i = order[k];
        if (suppressed[i]) continue;
        keep[i] = true;
        for (std::size_t l = k + 1; l < order.size(); ++l) {
            const std::size_t j = order[l];
            if (!suppressed[j] && iou(dets[i].bbox, dets[j].bbox) > iou_thresh) suppressed[j] = true;
        }
    }
    std::vector<Detection> out;
    for (std::size_t i = 0; i < dets.size(); ++i) {
        if (keep[i]) out.push_back(dets[i]);
    }
    return out;
}

std::vector<Detection> filter_detections(const std::vector<Detection>& dets, double min_confidence,
                                         double min_area) {
    std::vector<Detection> out;
    for (const auto& d : dets) {
        if (d.confidence >= min_confidence && d.bbox.area() >= min_area) out.push_back(d);
    }
    return out;
}

namespace {

std::vector<std::size_t> complement(std::size_t n, const std::vector<bool>& taken) {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < n; ++i) {
        if (!taken[i]) out.push_back(i);
    }
    return out;
}

}  // namespace

CascadeResult cascade_match(const std::vector<Track>& tracks, const std::vector<Detection>& dets,
                            const KalmanFilter& filter, const SctConfig& config) {
    std::vector<bool> track_taken(tracks.size(), false);
    std::vector<bool> det_taken(dets.size(), false);
    CascadeResult result;

    // Stage 1: appearance, gated by motion.
    if (!tracks.empty() && !dets.empty()) {
        CostMatrix cost(static_cast<Eigen::Index>(tracks.size()), static_cast<Eigen::Index>(dets.size()));
        for (std::size_t i = 0; i < tracks.size(); ++i) {
            for (std::size_t j = 0; j < dets.size(); ++j) {
                double c = 1.0 - cosine(tracks[i].smoothed_feature, dets[j].feature);
                c = std::max(c, 0.0);
                if (c > config.appearance_max_cost ||
                    filter.gating_distance(tracks[i].state, dets[j].bbox) > config.gate) {
                    c = kForbidden;
                }
                cost(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = c;
            }
        }
        for (const auto& m : min_cost_assignment(cost)) {
            result.matches.push_back(m);
            track_taken[m.row] = true;
            det_taken[m.col] = true;
        }
    }

    // Stage 2: box overlap for the remaining tracks that are still in view.
    std::vector<std::size_t> rest_tracks;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        if (!track_taken[i] && tracks[i].status != TrackStatus::lost) rest_tracks.push_back(i);
    }
    const auto rest_dets = complement(dets.size(), det_taken);
    if (!rest_tracks.empty() && !rest_dets.empty()) {
        CostMatrix cost(static_cast<Eigen::Index>(rest_tracks.size()),
                        static_cast<Eigen::Index>(rest_dets.size()));
        for (std::size_t a = 0; a < rest_tracks.size(); ++a) {
            const BBox predicted = to_bbox(tracks[rest_tracks[a]].state.mean);
            for (std::size_t b = 0; b < rest_dets.size(); ++b) {
                const double c = 1.0 - iou(predicted, dets[rest_dets[b]].bbox);
                cost(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    c > config.iou_max_cost ? kForbidden : c;
            }
        }
        for (const auto& m : min_cost_assignment(cost)) {
            result.matches.push_back({rest_tracks[m.row], rest_dets[m.col]});
            track_taken[rest_tracks[m.row]] = true;
            det_taken[rest_dets[m.col]] = true;
        }
    }

    std::sort(result.matches.begin(), result.matches.end(),
              [](const Match& a, const Match& b) { return a.row < b.row; });
    result.unmatched_tracks = complement(tracks.size(), track_taken);
    result.unmatched_detections = complement(dets.size(), det_taken);
    return result;
}

CameraTracker::CameraTracker(int camera_id, SctConfig config)
    : camera_id_(camera_id), config_(config), filter_(config.noise) {}

void CameraTracker::retire(Track& track) {
    const bool confirmed = track.status != TrackStatus::tentative;
    track.status = TrackStatus::removed;
    if (confirmed && track.observations.size() >= config_.min_length) {
        finished_.push_back({camera_id_, track.local_id, std::move(track.observations), std::nullopt});
    }
}

void CameraTracker::advance_to(int frame) {
    if (frame_ < 0) {
        frame_ = frame;
        return;
    }
    while (frame_ < frame && !tracks_.empty()) {
        ++frame_;
        for (auto& t : tracks_) {
            t.state = filter_.predict(t.state);
            if (t.status == TrackStatus::lost && frame_ - t.last_frame > config_.max_age) retire(t);
        }
        std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::removed; });
    }
    frame_ = frame;
}

void CameraTracker::step(int frame, const std::vector<Detection>& dets) {
    if (frame_ >= 0 && frame <= frame_) {
        throw Error("camera " + std::to_string(camera_id_) + ": frame " + std::to_string(frame) +
                    " is not after frame " + std::to_string(frame_));
    }
    advance_to(frame);
    const auto assoc = cascade_match(tracks_, dets, filter_, config_);

    for (const auto& m : assoc.matches) {
        Track& t = tracks_[m.row];
        const Detection& d = dets[m.col];
        t.state = filter_.update(t.state, d.bbox);
        t.smoothed_feature = l2_normalized(config_.feature_ema * t.smoothed_feature +
                                           (1.0 - config_.feature_ema) * d.feature);
        t.observations.push_back({frame, d.bbox, d.feature, d.row});
        t.last_frame = frame;
        t.status = TrackStatus::active;
    }
    for (std::size_t i : assoc.unmatched_tracks) {
        Track& t = tracks_[i];
        if (t.status == TrackStatus::tentative) {
            retire(t);
        } else if (t.status == TrackStatus::active) {
            t.status = TrackStatus::lost;
        }
    }
    std::erase_if(tracks_, [](const Track& t) { return t.status == TrackStatus::removed; });
    for (std::size_t j : assoc.unmatched_detections) {
        const Detection& d = dets[j];
        Track t;
        t.local_id = next_id_++;
        t.state = filter_.initiate(d.bbox);
        t.smoothed_feature = d.feature;
        t.last_frame = frame;
        t.observations.push_back({frame, d.bbox, d.feature, d.row});
        tracks_.push_back(std::move(t));
    }
}

std::vector<Tracklet> CameraTracker::finish() {
    for (auto& t : tracks_) retire(t);
    tracks_.clear();
    std::vector<Tracklet> out = std::move(finished_);
    finished_.clear();
    std::sort(out.begin(), out.end(),
              [](const Tracklet& a, const Tracklet& b) { return a.local_id < b.local_id; });
    return out;
}

std::vector<Tracklet> track_camera(const std::vector<Detection>& dets, const SctConfig& config) {
    if (dets.empty()) return {};
    const int camera = dets.front().camera_id;
    std::map<int, std::vector<Detection>> by_frame;
    for (const auto& d : dets) {
        if (d.camera_id != camera) {
            throw Error("track_camera expects detections of a single camera, got " +
                        std::to_string(camera) + " and " + std::to_string(d.camera_id));
        }
        by_frame[d.frame].push_back(d);
    }
    CameraTracker tracker(camera, config);
    for (const auto& [frame, frame_dets] : by_frame) {
        auto kept = filter_detections(nms(frame_dets, config.nms_iou, config.min_confidence),
                                      config.min_confidence, config.min_area);
        tracker.step(frame, kept);
    }
    return tracker.finish();
}

}  // namespace mtmct
