#pragma once

#include "mtmct/types.hpp"
#include "mtmct/zones.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <filesystem>
#include <vector>

namespace mtmct {

// Feature matrices hold one unit-norm tracklet feature per row.

class DegenerateFeature : public Error {
public:
    DegenerateFeature(int camera_id, int local_id);
};

/// Normalized mean of the observation features.
Feature tracklet_feature(const Tracklet& tracklet);
Eigen::MatrixXd tracklet_features(const std::vector<Tracklet>& tracklets);

struct BiasNormalization {
    Eigen::MatrixXd features;
    /// Rows left unchanged because subtracting their camera mean left ~zero.
    std::vector<std::size_t> degenerate;
};

/// Subtracts each camera's mean feature from its members and renormalizes.
/// Cameras with a single tracklet are left as they are.
BiasNormalization camera_bias_normalize(const Eigen::MatrixXd& features,
                                        const std::vector<int>& camera_ids);

/// Replaces each row by the normalized mean of itself and its k most
/// cosine-similar rows (ties to the lower index). k is clamped to m-1.
Eigen::MatrixXd neighbor_update(const Eigen::MatrixXd& features, std::size_t k);

/// Pairwise cosine similarity of unit rows.
Eigen::MatrixXd similarity_matrix(const Eigen::MatrixXd& features);

struct RerankParams {
    std::size_t k1 = 20;
    std::size_t k2 = 6;
    double lambda = 0.3;
};

/// k-reciprocal re-ranking. Distances are cosine distances 1 - S; the
/// result is returned as a similarity 1 - (lambda * d + (1 - lambda) * jaccard).
/// k1 and k2 are clamped to m-1.
Eigen::MatrixXd rerank_similarity(const Eigen::MatrixXd& similarity, const RerankParams& params);
Eigen::MatrixXd rerank(const Eigen::MatrixXd& features, const RerankParams& params);

/// Elementwise product with the 0/1 mask.
Eigen::MatrixXd apply_mask(const Eigen::MatrixXd& similarity, const MaskMatrix& mask);

struct AffinityConfig {
    bool bias_normalize = true;
    std::size_t neighbor_k = 2;
    RerankParams rerank;
};

struct AffinityResult {
    /// Features after every enabled transform; these feed query expansion.
    Eigen::MatrixXd features;
    /// Cosine similarity of the plain averaged features.
    Eigen::MatrixXd raw;
    /// Similarity after refinement (equal to raw when refinement is off).
    Eigen::MatrixXd refined;
    /// refined with the direction mask applied.
    Eigen::MatrixXd masked;
    std::vector<std::size_t> degenerate;
};

/// Average, bias-normalize, neighbor-update, rerank, mask. With `refine`
/// false only averaging and masking are applied.
AffinityResult compute_affinity(const std::vector<Tracklet>& tracklets, const MaskMatrix& mask,
                                const AffinityConfig& config, bool refine);

/// Row-major CSV with 6 decimals.
void write_similarity_csv(const Eigen::MatrixXd& similarity, const std::filesystem::path& path);

}  // namespace mtmct
