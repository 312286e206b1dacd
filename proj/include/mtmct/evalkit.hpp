#pragma once

#include "mtmct/io.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace mtmct {

struct IdCounts {
    std::int64_t idtp = 0;
    std::int64_t idfp = 0;
    std::int64_t idfn = 0;
    friend bool operator==(const IdCounts&, const IdCounts&) = default;
};

struct IdMetrics {
    double idf1 = 0.0;
    double idp = 0.0;
    double idr = 0.0;
    IdCounts counts;
};

/// Identity metrics from the optimal one-to-one gt/pred id assignment.
/// A gt and pred box correspond in a camera-frame when IoU >= iou_thresh.
/// Empty gt and pred score 1; an empty side's precision/recall is 1 by
/// convention.
IdMetrics id_metrics(const std::vector<SubmissionRow>& gt, const std::vector<SubmissionRow>& pred,
                     double iou_thresh = 0.5);

struct DetectionPr {
    double precision = 0.0;
    double recall = 0.0;
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t fn = 0;
};

/// Id-agnostic greedy IoU matching per camera-frame.
DetectionPr detection_pr(const std::vector<SubmissionRow>& gt, const std::vector<SubmissionRow>& pred,
                         double iou_thresh = 0.5);

/// Drops gt identities seen by fewer than two cameras.
std::vector<SubmissionRow> multi_camera_only(const std::vector<SubmissionRow>& gt);

struct EvalReport {
    IdMetrics id;
    DetectionPr detection;
    std::vector<std::string> warnings;
};

EvalReport evaluate(const std::vector<SubmissionRow>& gt, const std::vector<SubmissionRow>& pred,
                    double iou_thresh = 0.5, bool multi_cam_gt_only = false);

/// {"idf1","idp","idr","precision","recall","idtp","idfp","idfn"}
std::string report_json(const EvalReport& report);

}  // namespace mtmct
