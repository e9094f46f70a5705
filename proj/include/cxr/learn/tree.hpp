#pragma once

#include <span>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace cxr::learn {

enum class Criterion { entropy, gini };

std::string_view to_string(Criterion c);
Criterion criterion_from_string(std::string_view name);

/// -sum (c/n) log2 (c/n), bits. Throws if every count is zero.
double entropy_impurity(std::span<const double> counts);
double gini_impurity(std::span<const double> counts);
double impurity(Criterion c, std::span<const double> counts);

struct TreeNode {
    int feature = -1; // -1 for leaves
    double threshold = 0.0;
    int left = -1;  // samples with x[feature] <= threshold
    int right = -1;
    int depth = 0;
    std::vector<double> counts; // per class, training samples reaching the node

    bool is_leaf() const { return feature < 0; }
};

struct TreeParams {
    Criterion criterion = Criterion::entropy;
    int max_depth = 12;
    int min_samples_leaf = 1;
};

class TreeModel {
public:
    TreeModel() = default;
    TreeModel(std::vector<TreeNode> nodes, int n_features, int n_classes, TreeParams params);

    const std::vector<TreeNode>& nodes() const { return nodes_; }
    int n_features() const { return n_features_; }
    int n_classes() const { return n_classes_; }
    const TreeParams& params() const { return params_; }
    int depth() const;

    const TreeNode& leaf_for(std::span<const double> row) const;
    /// Majority class of the leaf; ties go to the smallest class id.
    int predict_one(std::span<const double> row) const;
    std::vector<int> predict(const Eigen::MatrixXd& x) const;
    /// Leaf class distributions, one row per sample.
    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;

private:
    std::vector<TreeNode> nodes_;
    int n_features_ = 0;
    int n_classes_ = 0;
    TreeParams params_;
};

/// Greedy CART. Candidate thresholds are midpoints between consecutive
/// distinct sorted values; the best impurity decrease wins, ties going to the
/// lower feature index and then the lower threshold. Both children must keep
/// min_samples_leaf samples. A split with zero decrease survives only when a
/// split below it has a positive one (the XOR case); otherwise it is pruned.
TreeModel tree_fit(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes,
                   const TreeParams& params);

std::vector<int> tree_predict(const TreeModel& model, const Eigen::MatrixXd& x);

double accuracy(std::span<const int> truth, std::span<const int> predicted);

} // namespace cxr::learn
