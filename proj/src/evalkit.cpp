#include "mtmct/evalkit.hpp"

#include "mtmct/numeric.hpp"

#include <json.hpp>

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

namespace mtmct {

namespace {

using FrameKey = std::pair<int, int>;  // (camera, frame)

std::map<FrameKey, std::vector<const SubmissionRow*>> by_frame(const std::vector<SubmissionRow>& rows) {
    std::map<FrameKey, std::vector<const SubmissionRow*>> out;
    for (const auto& r : rows) out[{r.camera_id, r.frame}].push_back(&r);
    return out;
}

std::map<int, std::size_t> index_ids(const std::vector<SubmissionRow>& rows) {
    std::map<int, std::size_t> out;
    for (const auto& r : rows) out.emplace(r.global_id, 0);
    std::size_t k = 0;
    for (auto& [id, idx] : out) idx = k++;
    return out;
}

double ratio_or_one(std::int64_t num, std::int64_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

IdMetrics id_metrics(const std::vector<SubmissionRow>& gt, const std::vector<SubmissionRow>& pred,
                     double iou_thresh) {
    const auto gt_ids = index_ids(gt);
    const auto pred_ids = index_ids(pred);
    Eigen::MatrixXd overlap = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(gt_ids.size()),
                                                    static_cast<Eigen::Index>(pred_ids.size()));
    const auto gt_frames = by_frame(gt);
    const auto pred_frames = by_frame(pred);
    for (const auto& [key, gt_rows] : gt_frames) {
        auto it = pred_frames.find(key);
        if (it == pred_frames.end()) continue;
        std::set<std::pair<std::size_t, std::size_t>> hit;
        for (const auto* g : gt_rows) {
            for (const auto* p : it->second) {
                if (iou(g->bbox, p->bbox) >= iou_thresh) {
                    hit.emplace(gt_ids.at(g->global_id), pred_ids.at(p->global_id));
                }
            }
        }
        for (const auto& [gi, pi] : hit) {
            overlap(static_cast<Eigen::Index>(gi), static_cast<Eigen::Index>(pi)) += 1.0;
        }
    }

    std::int64_t idtp = 0;
    if (overlap.size() > 0) {
        const double top = overlap.maxCoeff();
        const CostMatrix cost = (top - overlap.array()).matrix();
        for (const auto& m : min_cost_assignment(cost)) {
            idtp += static_cast<std::int64_t>(
                overlap(static_cast<Eigen::Index>(m.row), static_cast<Eigen::Index>(m.col)));
        }
    }
    IdMetrics out;
    out.counts.idtp = idtp;
    out.counts.idfn = static_cast<std::int64_t>(gt.size()) - idtp;
    out.counts.idfp = static_cast<std::int64_t>(pred.size()) - idtp;
    out.idp = ratio_or_one(idtp, idtp + out.counts.idfp);
    out.idr = ratio_or_one(idtp, idtp + out.counts.idfn);
    out.idf1 = ratio_or_one(2 * idtp, 2 * idtp + out.counts.idfp + out.counts.idfn);
    return out;
}

DetectionPr detection_pr(const std::vector<SubmissionRow>& gt, const std::vector<SubmissionRow>& pred,
                         double iou_thresh) {
    const auto gt_frames = by_frame(gt);
    const auto pred_frames = by_frame(pred);
    std::int64_t tp = 0;
    for (const auto& [key, gt_rows] : gt_frames) {
        auto it = pred_frames.find(key);
        if (it == pred_frames.end()) continue;
        const auto& pred_rows = it->second;
        std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
        for (std::size_t g = 0; g < gt_rows.size(); ++g) {
            for (std::size_t p = 0; p < pred_rows.size(); ++p) {
                const double v = iou(gt_rows[g]->bbox, pred_rows[p]->bbox);
                if (v >= iou_thresh) pairs.emplace_back(v, g, p);
            }
        }
        std::stable_sort(pairs.begin(), pairs.end(),
                         [](const auto& a, const auto& b) { return std::get<0>(a) > std::get<0>(b); });
        std::vector<bool> g_used(gt_rows.size(), false), p_used(pred_rows.size(), false);
        for (const auto& [v, g, p] : pairs) {
            if (g_used[g] || p_used[p]) continue;
            g_used[g] = p_used[p] = true;
            ++tp;
        }
    }
    DetectionPr out;
    out.tp = tp;
    out.fp = static_cast<std::int64_t>(pred.size()) - tp;
    out.fn = static_cast<std::int64_t>(gt.size()) - tp;
    out.precision = ratio_or_one(tp, tp + out.fp);
    out.recall = ratio_or_one(tp, tp + out.fn);
    return out;
}

std::vector<SubmissionRow> multi_camera_only(const std::vector<SubmissionRow>& gt) {
    std::map<int, std::set<int>> cameras;
    for (const auto& r : gt) cameras[r.global_id].insert(r.camera_id);
    std::vector<SubmissionRow> out;
    for (const auto& r : gt) {
        if (cameras[r.global_id].size() >= 2) out.push_back(r);
    }
    return out;
}

EvalReport evaluate(const std::vector<SubmissionRow>& gt_in, const std::vector<SubmissionRow>& pred,
                    double iou_thresh, bool multi_cam_gt_only) {
    const auto gt = multi_cam_gt_only ? multi_camera_only(gt_in) : gt_in;
    EvalReport report;
    report.id = id_metrics(gt, pred, iou_thresh);
    report.detection = detection_pr(gt, pred, iou_thresh);
    if (pred.empty()) report.warnings.push_back("prediction is empty; precision defined as 1");
    if (gt.empty()) report.warnings.push_back("ground truth is empty; recall defined as 1");
    return report;
}

std::string report_json(const EvalReport& report) {
    nlohmann::ordered_json doc;
    doc["idf1"] = report.id.idf1;
    doc["idp"] = report.id.idp;
    doc["idr"] = report.id.idr;
    doc["precision"] = report.detection.precision;
    doc["recall"] = report.detection.recall;
    doc["idtp"] = report.id.counts.idtp;
    doc["idfp"] = report.id.counts.idfp;
    doc["idfn"] = report.id.counts.idfn;
    return doc.dump(2);
}

}  // namespace mtmct
