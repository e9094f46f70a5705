#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cxr/error.hpp"
#include "cxr/learn/cluster.hpp"
#include "unit/learn_oracles.hpp"

using namespace cxr;
using namespace cxr::learn;

TEST_CASE("kmeans trivial cases") {
    const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(8, 3, 2.5);
    const KMeansResult one = kmeans(same, 1, 4);
    CHECK(one.inertia == 0.0);
    CHECK((one.centroids.row(0) - same.row(0)).norm() == 0.0);

    Eigen::MatrixXd two(2, 2);
    two << 0, 0, 3, 4;
    const KMeansResult r = kmeans(two, 2, 4);
    CHECK(r.inertia == 0.0);
    CHECK(r.assignments[0] != r.assignments[1]);

    CHECK_THROWS_AS(kmeans(two, 3, 1), Error);
}

TEST_CASE("kmeans recovers three blobs") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto blobs = oracle::gaussian_blobs(3, 60, 2, 0.5, 10.0, seed);
        const KMeansResult r = kmeans(blobs.x, 3, seed + 100);
        CHECK(adjusted_rand_index(r.assignments, blobs.labels) >= 0.99);
    }
}

TEST_CASE("kmeans is deterministic and repairs empty clusters") {
    const auto blobs = oracle::gaussian_blobs(2, 30, 3, 1.0, 8.0, 5);
    const KMeansResult a = kmeans(blobs.x, 4, 11);
    const KMeansResult b = kmeans(blobs.x, 4, 11);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);

    // Starting with every centroid far away leaves clusters empty.
    Eigen::MatrixXd start = Eigen::MatrixXd::Constant(3, 3, 1000.0);
    const KMeansResult r = lloyd(blobs.x, start);
    std::vector<int> sizes(3, 0);
    for (int v : r.assignments) ++sizes[static_cast<std::size_t>(v)];
    for (int s : sizes) CHECK(s > 0);
}

TEST_CASE("bic on a hand-computed 1-D toy set") {
    Eigen::MatrixXd x(4, 1);
    x << 0, 1, 2, 3;
    Eigen::MatrixXd c(1, 1);
    c << 1.5;
    const std::vector<int> a{0, 0, 0, 0};
    // SSE = 2.25 + 0.25 + 0.25 + 2.25 = 5; sigma^2 = 5 / 4
    const double var = 1.25;
    const double loglik = 4 * std::log(1.0) - 2.0 * std::log(2 * std::numbers::pi * var) - 2.0;
    const double expected = loglik - 1.0 * std::log(4.0);
    CHECK(std::abs(bic_score(x, c, a) - expected) <= 1e-12);
}

TEST_CASE("bic degenerate and split comparisons") {
    const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(5, 2, 1.0);
    const std::vector<int> a(5, 0);
    CHECK(std::isinf(bic_score(same, same.topRows(1), a)));

    const auto blob = oracle::gaussian_blobs(1, 200, 2, 0.3, 0.0, 8);
    const KMeansResult one = kmeans(blob.x, 1, 1);
    const KMeansResult two = kmeans(blob.x, 2, 1);
    CHECK(bic_score(blob.x, two.centroids, two.assignments) < bic_score(blob.x, one.centroids, one.assignments));

    const auto pair = oracle::gaussian_blobs(2, 100, 2, 0.3, 10.0, 8);
    const KMeansResult p1 = kmeans(pair.x, 1, 1);
    const KMeansResult p2 = kmeans(pair.x, 2, 1);
    CHECK(bic_score(pair.x, p2.centroids, p2.assignments) > bic_score(pair.x, p1.centroids, p1.assignments));
}

TEST_CASE("xmeans on identical points keeps one cluster") {
    const Eigen::MatrixXd same = Eigen::MatrixXd::Constant(10, 2, 0.5);
    const ClusterModel m = xmeans(same, 1, 5, 3);
    CHECK(m.k == 1);
}

TEST_CASE("xmeans finds three blobs across seeds") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto blobs = oracle::gaussian_blobs(3, 50, 3, 1.0, 10.0, 1000 + seed);
        const ClusterModel m = xmeans(blobs.x, 1, 10, seed);
        CHECK(m.k >= 1);
        CHECK(m.k <= 10);
        if (m.k == 3) ++hits;
    }
    CHECK(hits >= 95);
}

TEST_CASE("xmeans is bit-identical per seed and records its trace") {
    const auto blobs = oracle::gaussian_blobs(3, 40, 4, 1.0, 10.0, 77);
    const ClusterModel a = xmeans(blobs.x, 1, 8, 5);
    const ClusterModel b = xmeans(blobs.x, 1, 8, 5);
    CHECK(a.k == b.k);
    CHECK(a.assignments == b.assignments);
    CHECK(a.centroids == b.centroids);
    REQUIRE(a.bic_trace.size() == b.bic_trace.size());
    for (std::size_t i = 0; i < a.bic_trace.size(); ++i) CHECK(a.bic_trace[i].bic == b.bic_trace[i].bic);
    CHECK_FALSE(a.split_trials.empty());
    CHECK(a.bic_trace.front().k == 1);
    CHECK_THROWS_AS(xmeans(blobs.x, 3, 2, 1), Error);
}

TEST_CASE("adjusted rand index") {
    const std::vector<int> a{0, 0, 1, 1, 2, 2};
    const std::vector<int> relabeled{5, 5, 3, 3, 4, 4};
    CHECK(adjusted_rand_index(a, relabeled) == doctest::Approx(1.0));
    const std::vector<int> b{0, 1, 0, 1, 0, 1};
    CHECK(adjusted_rand_index(a, b) < 0.1);
}
