#include "helpers.hpp"
#include "mtmct/numeric.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <random>
#include <set>

using namespace mtmct;
using testing_support::vec;

TEST_CASE("iou examples") {
    CHECK(iou({3, 4, 5, 6}, {3, 4, 5, 6}) == 1.0);
    CHECK(iou({0, 0, 1, 1}, {5, 5, 1, 1}) == 0.0);
    CHECK(iou({0, 0, 2, 2}, {1, 0, 2, 2}) == doctest::Approx(1.0 / 3.0));
    CHECK(iou({0, 0, 1, 1}, {1, 0, 1, 1}) == 0.0);  // touching edge
}

TEST_CASE("iou against pixel counting") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> pos(0, 12), size(1, 8);
    for (int trial = 0; trial < 300; ++trial) {
        const int ax = pos(rng), ay = pos(rng), aw = size(rng), ah = size(rng);
        const int bx = pos(rng), by = pos(rng), bw = size(rng), bh = size(rng);
        const double expected = oracle::pixel_iou(ax, ay, aw, ah, bx, by, bw, bh);
        const BBox a{double(ax), double(ay), double(aw), double(ah)};
        const BBox b{double(bx), double(by), double(bw), double(bh)};
        CHECK(iou(a, b) == doctest::Approx(expected).epsilon(1e-12));
        CHECK(iou(a, b) == iou(b, a));
    }
}

TEST_CASE("cosine examples") {
    CHECK(cosine(vec({0.6, 0.8}), vec({0.6, 0.8})) == doctest::Approx(1.0));
    CHECK(cosine(vec({1, 0}), vec({0, 1})) == 0.0);
    CHECK(cosine(vec({1, 0}), vec({0.6, 0.8})) == doctest::Approx(0.6));
    CHECK_THROWS_AS(cosine(vec({1, 0}), vec({1, 0, 0})), DimensionError);
}

namespace {

CostMatrix matrix(std::initializer_list<std::initializer_list<double>> rows) {
    CostMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
    Eigen::Index i = 0;
    for (const auto& r : rows) {
        Eigen::Index j = 0;
        for (double v : r) m(i, j++) = v;
        ++i;
    }
    return m;
}

}  // namespace

TEST_CASE("assignment examples") {
    CHECK(min_cost_assignment(matrix({{0, 1, 1}, {1, 0, 1}, {1, 1, 0}})) ==
          std::vector<Match>{{0, 0}, {1, 1}, {2, 2}});
    const auto cross = matrix({{1, 2}, {2, 4}});
    const auto m = min_cost_assignment(cross);
    CHECK(m == std::vector<Match>{{0, 1}, {1, 0}});
    CHECK(assignment_cost(cross, m) == 4.0);
    CHECK(min_cost_assignment(matrix({{7}})) == std::vector<Match>{{0, 0}});
    CHECK(min_cost_assignment(CostMatrix(0, 3)).empty());
}

TEST_CASE("assignment leaves forbidden rows unmatched") {
    const auto m = min_cost_assignment(matrix({{kForbidden, kForbidden}, {3, 1}}));
    CHECK(m == std::vector<Match>{{1, 1}});
    // Two finite pairs beat one cheap pair.
    const auto n = min_cost_assignment(matrix({{0, 100}, {kForbidden, kForbidden}, {100, kForbidden}}));
    CHECK(n == std::vector<Match>{{0, 1}, {2, 0}});
}

TEST_CASE("assignment matches exhaustive search on rectangular and gated matrices") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> dim(1, 6);
    std::uniform_real_distribution<double> u(0, 10);
    std::bernoulli_distribution gate(0.2);
    for (int trial = 0; trial < 300; ++trial) {
        const int n = dim(rng), m = dim(rng);
        CostMatrix c(n, m);
        oracle::Grid g(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(m)));
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < m; ++j) {
                c(i, j) = gate(rng) ? kForbidden : std::floor(u(rng));
                g[std::size_t(i)][std::size_t(j)] = c(i, j);
            }
        }
        const auto matches = min_cost_assignment(c);
        std::set<std::size_t> rows, cols;
        for (const auto& mt : matches) {
            CHECK(std::isfinite(c(Eigen::Index(mt.row), Eigen::Index(mt.col))));
            CHECK(rows.insert(mt.row).second);
            CHECK(cols.insert(mt.col).second);
        }
        CHECK(assignment_cost(c, matches) == oracle::exhaustive_assignment(g));
    }
}

namespace {

CannotLink links(std::size_t n, std::initializer_list<std::pair<std::size_t, std::size_t>> pairs) {
    CannotLink cl(n);
    for (auto [a, b] : pairs) cl.add(a, b);
    return cl;
}

Eigen::MatrixXd random_dist(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(0, 1);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = u(rng);
    return d;
}

}  // namespace

TEST_CASE("agglomerative examples") {
    Eigen::MatrixXd far = Eigen::MatrixXd::Constant(3, 3, 0.5);
    far.diagonal().setZero();
    CHECK(constrained_agglomerative(far, 0.2, CannotLink(3)).clusters.size() == 3);

    Eigen::MatrixXd two(2, 2);
    two << 0, 0.1, 0.1, 0;
    CHECK(constrained_agglomerative(two, 0.2, CannotLink(2)).clusters ==
          std::vector<std::vector<std::size_t>>{{0, 1}});

    Eigen::MatrixXd tri = Eigen::MatrixXd::Constant(3, 3, 0.05);
    tri.diagonal().setZero();
    const auto r = constrained_agglomerative(tri, 0.2, links(3, {{0, 2}}));
    CHECK(r.clusters == std::vector<std::vector<std::size_t>>{{0, 1}, {2}});
    REQUIRE(r.merges.size() == 1);
    CHECK(r.merges[0].left == std::vector<std::size_t>{0});
    CHECK(r.merges[0].right == std::vector<std::size_t>{1});
}

TEST_CASE("agglomerative uses average linkage and a strict threshold") {
    // 0-1 close; 2 is 0.1 from 0 and 0.3 from 1: average 0.2, not below 0.2.
    Eigen::MatrixXd d(3, 3);
    d << 0, 0.01, 0.1, 0.01, 0, 0.3, 0.1, 0.3, 0;
    CHECK(constrained_agglomerative(d, 0.2, CannotLink(3)).clusters.size() == 2);
    CHECK(constrained_agglomerative(d, 0.2000001, CannotLink(3)).clusters.size() == 1);
}

TEST_CASE("agglomerative properties on random instances") {
    std::mt19937_64 rng(23);
    std::uniform_int_distribution<int> size(2, 12);
    std::bernoulli_distribution linked(0.15);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = size(rng);
        const auto d = random_dist(rng, n);
        CannotLink cl(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j)
                if (linked(rng)) cl.add(std::size_t(i), std::size_t(j));

        std::size_t previous = static_cast<std::size_t>(n) + 1;
        for (double threshold : {0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.1}) {
            const auto r = constrained_agglomerative(d, threshold, cl);
            std::vector<int> seen(static_cast<std::size_t>(n), 0);
            for (const auto& c : r.clusters) {
                for (auto i : c) ++seen[i];
                for (auto a : c)
                    for (auto b : c) CHECK_FALSE(cl.contains(a, b));
            }
            for (int s : seen) CHECK(s == 1);
            CHECK(r.clusters.size() <= previous);
            previous = r.clusters.size();
            for (const auto& m : r.merges) CHECK(m.distance < threshold);
        }
    }
}
