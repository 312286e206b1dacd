#pragma once

#include "mtmct/kalman.hpp"
#include "mtmct/numeric.hpp"
#include "mtmct/types.hpp"

#include <cstddef>
#include <vector>

namespace mtmct {

struct SctConfig {
    double nms_iou = 0.5;
    /// Detection filter defaults follow the reported tracker setup.
    double min_confidence = 0.1;
    double min_area = 750.0;
    double gate = kGate4Dof;
    double feature_ema = 0.9;
    int max_age = 30;
    std::size_t min_length = 2;
    double appearance_max_cost = 0.4;
    double iou_max_cost = 0.5;
    KalmanNoise noise;
};

/// Greedy NMS across all vehicle classes of one camera-frame. Detections
/// below `conf_thresh` are dropped first; ties keep the lower index. Output
/// preserves input order.
std::vector<Detection> nms(const std::vector<Detection>& dets, double iou_thresh, double conf_thresh);

/// Keeps detections with confidence >= min_confidence and area >= min_area.
std::vector<Detection> filter_detections(const std::vector<Detection>& dets,
                                         double min_confidence = 0.1, double min_area = 750.0);

enum class TrackStatus { tentative, active, lost, removed };

struct Track {
    int local_id = 0;
    KalmanState state;
    Feature smoothed_feature;
    TrackStatus status = TrackStatus::tentative;
    int last_frame = 0;
    std::vector<TrackletObservation> observations;
};

struct CascadeResult {
    std::vector<Match> matches;  // (track index, detection index)
    std::vector<std::size_t> unmatched_tracks;
    std::vector<std::size_t> unmatched_detections;
};

/// Two-stage association for tracks already predicted to the current frame.
/// Stage one matches on appearance (1 - cosine) inside the Mahalanobis gate;
/// stage two matches the leftover non-lost tracks on 1 - IoU.
CascadeResult cascade_match(const std::vector<Track>& tracks, const std::vector<Detection>& dets,
                            const KalmanFilter& filter, const SctConfig& config);

/// Sequential tracker for one camera. Frames must be fed in increasing order.
class CameraTracker {
public:
    CameraTracker(int camera_id, SctConfig config);

    /// Advances to `frame` and associates its detections, which should
    /// already be filtered.
    void step(int frame, const std::vector<Detection>& dets);

    /// Closes all tracks and returns tracklets of at least min_length
    /// observations, ordered by local id.
    std::vector<Tracklet> finish();

    const std::vector<Track>& tracks() const { return tracks_; }

private:
    void advance_to(int frame);
    void retire(Track& track);

    int camera_id_;
    SctConfig config_;
    KalmanFilter filter_;
    std::vector<Track> tracks_;
    std::vector<Tracklet> finished_;
    int next_id_ = 1;
    int frame_ = -1;
};

/// Runs NMS, filtering and tracking over one camera's detections (any order).
std::vector<Tracklet> track_camera(const std::vector<Detection>& dets, const SctConfig& config);

}  // namespace mtmct
