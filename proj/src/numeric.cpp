#include "mtmct/numeric.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mtmct {

double iou(const BBox& a, const BBox& b) {
    const double iw = std::min(a.right(), b.right()) - std::max(a.x, b.x);
    const double ih = std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y);
    if (iw <= 0.0 || ih <= 0.0) return 0.0;
    const double inter = iw * ih;
    return inter / (a.area() + b.area() - inter);
}

double cosine(const Feature& f, const Feature& g) {
    if (f.size() != g.size()) {
        throw DimensionError("cosine of vectors with dimensions " + std::to_string(f.size()) +
                             " and " + std::to_string(g.size()));
    }
    return f.dot(g);
}

namespace {

// Shortest augmenting path Hungarian method on an n x m matrix, n <= m.
// Returns the column assigned to each row.
std::vector<std::size_t> hungarian(const Eigen::MatrixXd& a) {
    const auto n = static_cast<std::size_t>(a.rows());
    const auto m = static_cast<std::size_t>(a.cols());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0);
    std::vector<std::size_t> p(m + 1, 0), way(m + 1, 0);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::vector<double> minv(m + 1, inf);
        std::vector<bool> used(m + 1, false);
        do {
            used[j0] = true;
            const std::size_t i0 = p[j0];
            double delta = inf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= m; ++j) {
                if (used[j]) continue;
                const double cur = a(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                                   u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> row_to_col(n, 0);
    for (std::size_t j = 1; j <= m; ++j) {
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    }
    return row_to_col;
}

}  // namespace

std::vector<Match> min_cost_assignment(const CostMatrix& cost) {
    const auto rows = static_cast<std::size_t>(cost.rows());
    const auto cols = static_cast<std::size_t>(cost.cols());
    if (rows == 0 || cols == 0) return {};

    // Forbidden entries become a penalty larger than any all-finite
    // assignment, so the solver maximises the number of finite pairs first.
    double max_finite = 0.0;
    for (Eigen::Index i = 0; i < cost.rows(); ++i) {
        for (Eigen::Index j = 0; j < cost.cols(); ++j) {
            const double c = cost(i, j);
            if (std::isnan(c) || c < 0.0) {
                throw DimensionError("assignment costs must be non-negative or +inf");
            }
            if (std::isfinite(c)) max_finite = std::max(max_finite, c);
        }
    }
    const double penalty = static_cast<double>(std::min(rows, cols)) * (max_finite + 1.0) + 1.0;
    Eigen::MatrixXd work = cost.unaryExpr([&](double c) { return std::isfinite(c) ? c : penalty; });

    const bool transposed = rows > cols;
    if (transposed) work.transposeInPlace();
    const auto assigned = hungarian(work);

    std::vector<Match> matches;
    for (std::size_t i = 0; i < assigned.size(); ++i) {
        Match m = transposed ? Match{assigned[i], i} : Match{i, assigned[i]};
        if (std::isfinite(cost(static_cast<Eigen::Index>(m.row), static_cast<Eigen::Index>(m.col)))) {
            matches.push_back(m);
        }
    }
    std::sort(matches.begin(), matches.end(),
              [](const Match& a, const Match& b) { return a.row < b.row; });
    return matches;
}

double assignment_cost(const CostMatrix& cost, const std::vector<Match>& matches) {
    double total = 0.0;
    for (const auto& m : matches) {
        total += cost(static_cast<Eigen::Index>(m.row), static_cast<Eigen::Index>(m.col));
    }
    return total;
}

void CannotLink::add(std::size_t i, std::size_t j) {
    bits_[i * n_ + j] = true;
    bits_[j * n_ + i] = true;
}

Clustering constrained_agglomerative(const Eigen::MatrixXd& dist, double threshold,
                                     const CannotLink& cannot_link) {
    if (dist.rows() != dist.cols()) {
        throw DimensionError("distance matrix must be square");
    }
    const auto n = static_cast<std::size_t>(dist.rows());
    if (cannot_link.size() != n) {
        throw DimensionError("cannot-link set size does not match distance matrix");
    }

    // Slot k always holds the cluster whose smallest member is k, so scanning
    // slots in order realises the lowest-index tie-break.
    std::vector<std::vector<std::size_t>> members(n);
    std::vector<bool> alive(n, true);
    Eigen::MatrixXd pair_sum = dist;
    std::vector<std::vector<bool>> blocked(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i) {
        members[i] = {i};
        for (std::size_t j = 0; j < n; ++j) blocked[i][j] = cannot_link.contains(i, j);
    }

    Clustering result;
    while (true) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_a = n, best_b = n;
        for (std::size_t a = 0; a < n; ++a) {
            if (!alive[a]) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!alive[b] || blocked[a][b]) continue;
                const double linkage =
                    pair_sum(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) /
                    static_cast<double>(members[a].size() * members[b].size());
                if (linkage < best) {
                    best = linkage;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a == n || !(best < threshold)) break;

        result.merges.push_back({members[best_a], members[best_b], best});
        members[best_a].insert(members[best_a].end(), members[best_b].begin(), members[best_b].end());
        std::sort(members[best_a].begin(), members[best_a].end());
        members[best_b].clear();
        alive[best_b] = false;
        const auto ia = static_cast<Eigen::Index>(best_a);
        const auto ib = static_cast<Eigen::Index>(best_b);
        for (std::size_t c = 0; c < n; ++c) {
            if (!alive[c] || c == best_a) continue;
            const auto ic = static_cast<Eigen::Index>(c);
            pair_sum(ia, ic) += pair_sum(ib, ic);
            pair_sum(ic, ia) = pair_sum(ia, ic);
            const bool blocked_ac = blocked[best_a][c] || blocked[best_b][c];
            blocked[best_a][c] = blocked_ac;
            blocked[c][best_a] = blocked_ac;
        }
    }

    for (std::size_t k = 0; k < n; ++k) {
        if (alive[k]) result.clusters.push_back(members[k]);
    }
    return result;
}

}  // namespace mtmct
