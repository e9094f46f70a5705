#include "cxr/learn/cluster.hpp"

#include <cassert>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

#include "cxr/error.hpp"
#include "cxr/random.hpp"

namespace cxr::learn {

namespace {

double squared_distance(const Eigen::MatrixXd& x, Eigen::Index row, const Eigen::MatrixXd& c,
                        Eigen::Index centroid) {
    return (x.row(row) - c.row(centroid)).squaredNorm();
}

// Nearest centroid per row, ties to the lower index. Returns true if any
// assignment changed.
bool assign(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, std::vector<int>& assignments) {
    bool changed = false;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        int best = 0;
        double best_d = std::numeric_limits<double>::infinity();
        for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
            const double d = squared_distance(x, i, centroids, c);
            if (d < best_d) {
                best_d = d;
                best = static_cast<int>(c);
            }
        }
        auto& slot = assignments[static_cast<std::size_t>(i)];
        if (slot != best) {
            slot = best;
            changed = true;
        }
    }
    return changed;
}

double inertia_of(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, const std::vector<int>& assignments) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        total += squared_distance(x, i, centroids, assignments[static_cast<std::size_t>(i)]);
    }
    return total;
}

// Moves the point farthest from its centroid (in a cluster with more than
// one member) into each empty cluster, and makes it that cluster's centroid.
void repair_empty(const Eigen::MatrixXd& x, Eigen::MatrixXd& centroids, std::vector<int>& assignments) {
    const auto k = centroids.rows();
    for (Eigen::Index c = 0; c < k; ++c) {
        std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
        for (int a : assignments) ++sizes[static_cast<std::size_t>(a)];
        if (sizes[static_cast<std::size_t>(c)] > 0) continue;

        Eigen::Index far = -1;
        double far_d = -1.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            const int a = assignments[static_cast<std::size_t>(i)];
            if (sizes[static_cast<std::size_t>(a)] < 2) continue;
            const double d = squared_distance(x, i, centroids, a);
            if (d > far_d) {
                far_d = d;
                far = i;
            }
        }
        if (far < 0) throw Error("k-means: cannot repair empty cluster");
        assignments[static_cast<std::size_t>(far)] = static_cast<int>(c);
        centroids.row(c) = x.row(far);
    }
}

void update(const Eigen::MatrixXd& x, Eigen::MatrixXd& centroids, const std::vector<int>& assignments) {
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(centroids.rows(), centroids.cols());
    std::vector<double> counts(static_cast<std::size_t>(centroids.rows()), 0.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int a = assignments[static_cast<std::size_t>(i)];
        sums.row(a) += x.row(i);
        counts[static_cast<std::size_t>(a)] += 1.0;
    }
    for (Eigen::Index c = 0; c < centroids.rows(); ++c) {
        if (counts[static_cast<std::size_t>(c)] > 0.0) centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
    }
}

Eigen::MatrixXd kmeanspp_init(const Eigen::MatrixXd& x, int k, Rng& rng) {
    const auto n = static_cast<std::size_t>(x.rows());
    Eigen::MatrixXd centroids(k, x.cols());
    centroids.row(0) = x.row(static_cast<Eigen::Index>(rng.below(n)));
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (int c = 1; c < k; ++c) {
        double total = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            nearest[i] = std::min(nearest[i], squared_distance(x, static_cast<Eigen::Index>(i), centroids, c - 1));
            total += nearest[i];
        }
        std::size_t pick = 0;
        if (total > 0.0) {
            const double target = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += nearest[i];
                if (acc > target && nearest[i] > 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = rng.below(n);
        }
        centroids.row(c) = x.row(static_cast<Eigen::Index>(pick));
    }
    return centroids;
}

} // namespace

KMeansResult lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centroids, int max_iter) {
    if (centroids.rows() < 1 || centroids.rows() > x.rows()) throw Error("k-means: need 1 <= k <= N");
    if (centroids.cols() != x.cols()) throw Error("k-means: centroid width mismatch");

    KMeansResult result;
    result.assignments.assign(static_cast<std::size_t>(x.rows()), -1);
    assign(x, centroids, result.assignments);
    [[maybe_unused]] double previous = std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iter; ++it) {
        repair_empty(x, centroids, result.assignments);
        update(x, centroids, result.assignments);
        result.iterations = it + 1;
#ifndef NDEBUG
        const double current = inertia_of(x, centroids, result.assignments);
        assert(current <= previous * (1.0 + 1e-12) + 1e-12);
        previous = current;
#endif
        if (!assign(x, centroids, result.assignments)) break;
    }
    repair_empty(x, centroids, result.assignments);
    result.centroids = std::move(centroids);
    result.inertia = inertia_of(x, result.centroids, result.assignments);
    return result;
}

KMeansResult kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int max_iter) {
    if (k < 1) throw Error("k-means: k must be >= 1");
    if (k > x.rows()) throw Error("k-means: k exceeds the number of samples");
    Rng rng(seed);
    return lloyd(x, kmeanspp_init(x, k, rng), max_iter);
}

double bic_score(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids, std::span<const int> assignments) {
    const auto n = static_cast<double>(x.rows());
    const auto d = static_cast<double>(x.cols());
    const auto k = centroids.rows();
    if (x.rows() == 0 || static_cast<Eigen::Index>(assignments.size()) != x.rows()) {
        throw Error("BIC: assignment count mismatch");
    }

    std::vector<double> sizes(static_cast<std::size_t>(k), 0.0);
    double sse = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const int a = assignments[static_cast<std::size_t>(i)];
        if (a < 0 || a >= k) throw Error("BIC: assignment out of range");
        sizes[static_cast<std::size_t>(a)] += 1.0;
        sse += squared_distance(x, i, centroids, a);
    }
    const double variance = sse / (n * d);
    if (!(variance > 0.0)) return std::numeric_limits<double>::infinity();

    double loglik = 0.0;
    for (double s : sizes) {
        if (s > 0.0) loglik += s * std::log(s / n);
    }
    loglik -= 0.5 * n * d * std::log(2.0 * std::numbers::pi * variance);
    loglik -= 0.5 * n * d;
    const double params = static_cast<double>(k) * (d + 1.0);
    return loglik - 0.5 * params * std::log(n);
}

ClusterModel xmeans(const Eigen::MatrixXd& x, int k_min, int k_max, std::uint64_t seed) {
    if (k_min < 1 || k_min > k_max || k_max > x.rows()) {
        throw Error("x-means: need 1 <= k_min <= k_max <= N");
    }
    ClusterModel out;
    out.seed = seed;
    std::uint64_t stream = 0;

    KMeansResult current = kmeans(x, k_min, derive_seed(seed, stream++));
    KMeansResult best = current;
    double best_bic = bic_score(x, current.centroids, current.assignments);
    out.bic_trace.push_back({k_min, best_bic});

    while (current.centroids.rows() < k_max) {
        const auto k = static_cast<int>(current.centroids.rows());
        std::vector<Eigen::RowVectorXd> next;
        int accepted = 0;
        for (int c = 0; c < k; ++c) {
            std::vector<Eigen::Index> members;
            for (Eigen::Index i = 0; i < x.rows(); ++i) {
                if (current.assignments[static_cast<std::size_t>(i)] == c) members.push_back(i);
            }
            if (members.size() < 2 || k + accepted >= k_max) {
                next.push_back(current.centroids.row(c));
                continue;
            }
            Eigen::MatrixXd local(static_cast<Eigen::Index>(members.size()), x.cols());
            for (std::size_t m = 0; m < members.size(); ++m) local.row(static_cast<Eigen::Index>(m)) = x.row(members[m]);

            const std::vector<int> single(members.size(), 0);
            const double parent = bic_score(local, current.centroids.row(c), single);
            const KMeansResult children = kmeans(local, 2, derive_seed(seed, stream++));
            const double split = bic_score(local, children.centroids, children.assignments);
            const bool accept = split > parent;
            out.split_trials.push_back({k, c, parent, split, accept});
            if (accept) {
                next.push_back(children.centroids.row(0));
                next.push_back(children.centroids.row(1));
                ++accepted;
            } else {
                next.push_back(current.centroids.row(c));
            }
        }
        if (accepted == 0) break;

        Eigen::MatrixXd start(static_cast<Eigen::Index>(next.size()), x.cols());
        for (std::size_t r = 0; r < next.size(); ++r) start.row(static_cast<Eigen::Index>(r)) = next[r];
        current = lloyd(x, std::move(start));
        const double bic = bic_score(x, current.centroids, current.assignments);
        out.bic_trace.push_back({static_cast<int>(current.centroids.rows()), bic});
        if (bic > best_bic) {
            best_bic = bic;
            best = current;
        }
    }

    out.k = static_cast<int>(best.centroids.rows());
    out.centroids = std::move(best.centroids);
    out.assignments = std::move(best.assignments);
    return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw Error("ARI: partitions differ in length");
    const auto n = static_cast<double>(a.size());
    if (a.size() < 2) return 1.0;

    std::map<std::pair<int, int>, double> joint;
    std::map<int, double> rows, cols;
    for (std::size_t i = 0; i < a.size(); ++i) {
        joint[{a[i], b[i]}] += 1.0;
        rows[a[i]] += 1.0;
        cols[b[i]] += 1.0;
    }
    auto choose2 = [](double v) { return v * (v - 1.0) / 2.0; };
    double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
    for (const auto& [key, v] : joint) index += choose2(v);
    for (const auto& [key, v] : rows) sum_rows += choose2(v);
    for (const auto& [key, v] : cols) sum_cols += choose2(v);
    const double expected = sum_rows * sum_cols / choose2(n);
    const double max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index == expected) return 1.0;
    return (index - expected) / (max_index - expected);
}

} // namespace cxr::learn
