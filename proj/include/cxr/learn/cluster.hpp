#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace cxr::learn {

struct KMeansResult {
    Eigen::MatrixXd centroids; // k x D
    std::vector<int> assignments;
    double inertia = 0.0;
    int iterations = 0;
};

/// k-means++ seeding followed by Lloyd iterations until the assignment is a
/// fixpoint or `max_iter` is reached. An empty cluster takes over the point
/// farthest from its current centroid.
KMeansResult kmeans(const Eigen::MatrixXd& x, int k, std::uint64_t seed, int max_iter = 300);

/// Lloyd iterations from the given starting centroids.
KMeansResult lloyd(const Eigen::MatrixXd& x, Eigen::MatrixXd centroids, int max_iter = 300);

/// Spherical-Gaussian BIC (higher is better):
///
///   sigma^2 = SSE / (N * D)                     pooled MLE variance
///   loglik  = sum_j n_j log(n_j / N) - N D / 2 * log(2 pi sigma^2) - N D / 2
///   p       = k * D centroid coordinates + 1 variance + (k - 1) weights
///           = k * (D + 1)
///   BIC     = loglik - p / 2 * log N
///
/// Returns +infinity when sigma^2 is 0 (every point sits on its centroid).
double bic_score(const Eigen::MatrixXd& x, const Eigen::MatrixXd& centroids,
                 std::span<const int> assignments);

/// One local split test: cluster `cluster` of a `k_before`-cluster model.
struct SplitTrial {
    int k_before = 0;
    int cluster = 0;
    double parent_bic = 0.0;
    double children_bic = 0.0;
    bool accepted = false;
};

/// Global BIC of the model reached after a round.
struct BicPoint {
    int k = 0;
    double bic = 0.0;
};

struct ClusterModel {
    int k = 0;
    Eigen::MatrixXd centroids;
    std::vector<int> assignments;
    std::vector<SplitTrial> split_trials;
    std::vector<BicPoint> bic_trace;
    std::uint64_t seed = 0;
};

/// X-means: start from k-means with k_min, then in rounds trial-split every
/// cluster into two (local k-means on its members) and keep a split iff the
/// children's BIC on those members beats the parent's. Each round ends with
/// global Lloyd refinement. Stops when no split is accepted or k_max is hit.
/// Returns the visited model with the highest global BIC.
ClusterModel xmeans(const Eigen::MatrixXd& x, int k_min, int k_max, std::uint64_t seed);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

} // namespace cxr::learn
