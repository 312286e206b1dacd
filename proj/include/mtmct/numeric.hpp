#pragma once

#include "mtmct/types.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <limits>
#include <vector>

namespace mtmct {

inline constexpr double kForbidden = std::numeric_limits<double>::infinity();

double iou(const BBox& a, const BBox& b);

/// Dot product of two unit vectors; throws DimensionError on size mismatch.
double cosine(const Feature& f, const Feature& g);

/// Dense cost matrix; +inf marks a forbidden pair.
using CostMatrix = Eigen::MatrixXd;

struct Match {
    std::size_t row = 0;
    std::size_t col = 0;
    friend bool operator==(const Match&, const Match&) = default;
};

/// Minimum-cost rectangular assignment. Among all matchings it first
/// maximises the number of finite pairs, then minimises their total cost.
/// Forbidden pairs are never returned. Result is sorted by row.
std::vector<Match> min_cost_assignment(const CostMatrix& cost);

double assignment_cost(const CostMatrix& cost, const std::vector<Match>& matches);

/// Symmetric set of item pairs that may never end up in one cluster.
class CannotLink {
public:
    explicit CannotLink(std::size_t n = 0) : n_(n), bits_(n * n, false) {}

    std::size_t size() const { return n_; }
    void add(std::size_t i, std::size_t j);
    bool contains(std::size_t i, std::size_t j) const { return bits_[i * n_ + j]; }

private:
    std::size_t n_;
    std::vector<bool> bits_;
};

struct Merge {
    std::vector<std::size_t> left;
    std::vector<std::size_t> right;
    double distance = 0.0;
};

struct Clustering {
    /// Partition of 0..n-1; members ascending, clusters ordered by first member.
    std::vector<std::vector<std::size_t>> clusters;
    /// Merges in the order they were performed.
    std::vector<Merge> merges;
};

/// Average-linkage agglomeration of a symmetric distance matrix. Clusters
/// merge, closest pair first, while their linkage is strictly below
/// `threshold`; two clusters holding a cannot-link pair never merge. Ties go
/// to the pair with the lowest member indices.
Clustering constrained_agglomerative(const Eigen::MatrixXd& dist, double threshold,
                                     const CannotLink& cannot_link);

}  // namespace mtmct
