#include "mtmct/affinity.hpp"

#include "mtmct/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

namespace mtmct {

namespace {

constexpr double kDegenerateNorm = 1e-9;

std::vector<std::size_t> ranking(const Eigen::MatrixXd& dist, std::size_t i) {
    std::vector<std::size_t> order(static_cast<std::size_t>(dist.cols()));
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto row = static_cast<Eigen::Index>(i);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dist(row, static_cast<Eigen::Index>(a)) < dist(row, static_cast<Eigen::Index>(b));
    });
    return order;
}

// Members of the first `k + 1` ranks of `i` that also rank `i` within their
// own first `k + 1`, in rank order of `i`.
std::vector<std::size_t> reciprocal_neighbors(const std::vector<std::vector<std::size_t>>& rank,
                                              std::size_t i, std::size_t k) {
    std::vector<std::size_t> out;
    for (std::size_t a = 0; a <= k; ++a) {
        const std::size_t c = rank[i][a];
        const auto begin = rank[c].begin();
        if (std::find(begin, begin + static_cast<std::ptrdiff_t>(k + 1), i) !=
            begin + static_cast<std::ptrdiff_t>(k + 1)) {
            out.push_back(c);
        }
    }
    return out;
}

}  // namespace

DegenerateFeature::DegenerateFeature(int camera_id, int local_id)
    : Error("tracklet " + std::to_string(local_id) + " on camera " + std::to_string(camera_id) +
            " has a zero mean feature") {}

Feature tracklet_feature(const Tracklet& tracklet) {
    if (tracklet.observations.empty()) {
        throw Error("tracklet " + std::to_string(tracklet.local_id) + " has no observations");
    }
    Feature sum = Feature::Zero(tracklet.observations.front().feature.size());
    for (const auto& o : tracklet.observations) sum += o.feature;
    const Feature mean = sum / static_cast<double>(tracklet.observations.size());
    if (mean.norm() < kDegenerateNorm) throw DegenerateFeature(tracklet.camera_id, tracklet.local_id);
    return mean.normalized();
}

Eigen::MatrixXd tracklet_features(const std::vector<Tracklet>& tracklets) {
    if (tracklets.empty()) return {};
    const auto d = tracklets.front().observations.front().feature.size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(tracklets.size()), d);
    for (std::size_t i = 0; i < tracklets.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = tracklet_feature(tracklets[i]).transpose();
    }
    return out;
}

BiasNormalization camera_bias_normalize(const Eigen::MatrixXd& features,
                                        const std::vector<int>& camera_ids) {
    if (static_cast<std::size_t>(features.rows()) != camera_ids.size()) {
        throw DimensionError("camera id count does not match feature rows");
    }
    std::map<int, std::vector<Eigen::Index>> groups;
    for (std::size_t i = 0; i < camera_ids.size(); ++i) {
        groups[camera_ids[i]].push_back(static_cast<Eigen::Index>(i));
    }
    BiasNormalization out{features, {}};
    for (const auto& [camera, rows] : groups) {
        if (rows.size() < 2) continue;
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(features.cols());
        for (auto r : rows) mean += features.row(r);
        mean /= static_cast<double>(rows.size());
        for (auto r : rows) {
            const Eigen::RowVectorXd centered = features.row(r) - mean;
            const double norm = centered.norm();
            if (norm < kDegenerateNorm) {
                out.degenerate.push_back(static_cast<std::size_t>(r));
            } else {
                out.features.row(r) = centered / norm;
            }
        }
    }
    std::sort(out.degenerate.begin(), out.degenerate.end());
    return out;
}

Eigen::MatrixXd neighbor_update(const Eigen::MatrixXd& features, std::size_t k) {
    const auto m = static_cast<std::size_t>(features.rows());
    if (m < 2) return features;
    k = std::min(k, m - 1);
    if (k == 0) return features;
    const Eigen::MatrixXd sim = features * features.transpose();
    Eigen::MatrixXd out = features;
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<std::size_t> others;
        for (std::size_t j = 0; j < m; ++j) {
            if (j != i) others.push_back(j);
        }
        const auto row = static_cast<Eigen::Index>(i);
        std::stable_sort(others.begin(), others.end(), [&](std::size_t a, std::size_t b) {
            return sim(row, static_cast<Eigen::Index>(a)) > sim(row, static_cast<Eigen::Index>(b));
        });
        Eigen::RowVectorXd sum = features.row(row);
        for (std::size_t n = 0; n < k; ++n) sum += features.row(static_cast<Eigen::Index>(others[n]));
        const double norm = sum.norm();
        if (norm >= kDegenerateNorm) out.row(row) = sum / norm;
    }
    return out;
}

Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& features) {
    return features * features.transpose();
}

Eigen::MatrixXd rerank_similarity(const Eigen::MatrixXd& similarity, const RerankParams& params) {
    const auto m = static_cast<std::size_t>(similarity.rows());
    if (m < 2) return similarity;
    const std::size_t k1 = std::clamp<std::size_t>(params.k1, 1, m - 1);
    const std::size_t k2 = std::clamp<std::size_t>(params.k2, 1, m - 1);
    const auto mi = static_cast<Eigen::Index>(m);
    const Eigen::MatrixXd dist = (1.0 - similarity.array()).matrix();

    std::vector<std::vector<std::size_t>> rank(m);
    for (std::size_t i = 0; i < m; ++i) rank[i] = ranking(dist, i);

    const auto half = static_cast<std::size_t>(std::nearbyint(static_cast<double>(k1) / 2.0));
    Eigen::MatrixXd v = Eigen::MatrixXd::Zero(mi, mi);
    for (std::size_t i = 0; i < m; ++i) {
        const auto reciprocal = reciprocal_neighbors(rank, i, k1);
        std::vector<std::size_t> expansion = reciprocal;
        for (std::size_t candidate : reciprocal) {
            const auto cand_set = reciprocal_neighbors(rank, candidate, half);
            std::size_t shared = 0;
            for (std::size_t x : cand_set) {
                if (std::find(reciprocal.begin(), reciprocal.end(), x) != reciprocal.end()) ++shared;
            }
            if (static_cast<double>(shared) > 2.0 / 3.0 * static_cast<double>(cand_set.size())) {
                expansion.insert(expansion.end(), cand_set.begin(), cand_set.end());
            }
        }
        std::sort(expansion.begin(), expansion.end());
        expansion.erase(std::unique(expansion.begin(), expansion.end()), expansion.end());

        const auto row = static_cast<Eigen::Index>(i);
        double total = 0.0;
        for (std::size_t e : expansion) {
            const double w = std::exp(-dist(row, static_cast<Eigen::Index>(e)));
            v(row, static_cast<Eigen::Index>(e)) = w;
            total += w;
        }
        v.row(row) /= total;
    }

    if (k2 > 1) {
        Eigen::MatrixXd expanded(mi, mi);
        for (std::size_t i = 0; i < m; ++i) {
            Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(mi);
            for (std::size_t a = 0; a < k2; ++a) acc += v.row(static_cast<Eigen::Index>(rank[i][a]));
            expanded.row(static_cast<Eigen::Index>(i)) = acc / static_cast<double>(k2);
        }
        v = std::move(expanded);
    }

    // Rows of v sum to one, so sum(max) = 2 - sum(min).
    std::vector<std::vector<Eigen::Index>> holders(m);
    for (Eigen::Index i = 0; i < mi; ++i) {
        for (Eigen::Index c = 0; c < mi; ++c) {
            if (v(i, c) != 0.0) holders[static_cast<std::size_t>(c)].push_back(i);
        }
    }
    Eigen::MatrixXd out(mi, mi);
    const double lambda = params.lambda;
    for (Eigen::Index i = 0; i < mi; ++i) {
        Eigen::RowVectorXd shared = Eigen::RowVectorXd::Zero(mi);
        for (Eigen::Index c = 0; c < mi; ++c) {
            const double vic = v(i, c);
            if (vic == 0.0) continue;
            for (Eigen::Index j : holders[static_cast<std::size_t>(c)]) {
                shared[j] += std::min(vic, v(j, c));
            }
        }
        for (Eigen::Index j = 0; j < mi; ++j) {
            const double jaccard = 1.0 - shared[j] / (2.0 - shared[j]);
            out(i, j) = 1.0 - ((1.0 - lambda) * jaccard + lambda * dist(i, j));
        }
    }
    return out;
}

Eigen::MatrixXd rerank(const Eigen::MatrixXd& features, const RerankParams& params) {
    return rerank_similarity(similarity_matrix(features), params);
}

Eigen::MatrixXd apply_mask(const Eigen::MatrixXd& similarity, const MaskMatrix& mask) {
    if (similarity.rows() != mask.rows() || similarity.cols() != mask.cols()) {
        throw DimensionError("similarity is " + std::to_string(similarity.rows()) + "x" +
                             std::to_string(similarity.cols()) + " but mask is " +
                             std::to_string(mask.rows()) + "x" + std::to_string(mask.cols()));
    }
    return similarity.cwiseProduct(mask.cast<double>());
}

AffinityResult compute_affinity(const std::vector<Tracklet>& tracklets, const MaskMatrix& mask,
                                const AffinityConfig& config, bool refine) {
    AffinityResult out;
    out.features = tracklet_features(tracklets);
    out.raw = similarity_matrix(out.features);
    if (refine && !tracklets.empty()) {
        if (config.bias_normalize) {
            std::vector<int> cameras;
            for (const auto& t : tracklets) cameras.push_back(t.camera_id);
            auto normalized = camera_bias_normalize(out.features, cameras);
            out.features = std::move(normalized.features);
            out.degenerate = std::move(normalized.degenerate);
        }
        out.features = neighbor_update(out.features, config.neighbor_k);
        out.refined = rerank(out.features, config.rerank);
    } else {
        out.refined = out.raw;
    }
    out.masked = apply_mask(out.refined, mask);
    return out;
}

void write_similarity_csv(const Eigen::MatrixXd& similarity, const std::filesystem::path& path) {
    std::string text;
    char buf[32];
    for (Eigen::Index i = 0; i < similarity.rows(); ++i) {
        for (Eigen::Index j = 0; j < similarity.cols(); ++j) {
            if (j > 0) text += ',';
            std::snprintf(buf, sizeof(buf), "%.6f", similarity(i, j));
            text += buf;
        }
        text += '\n';
    }
    write_text_file(path, text);
}

}  // namespace mtmct
