#include "cxr/learn/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "cxr/error.hpp"

namespace cxr::learn {

std::string_view to_string(Criterion c) { return c == Criterion::entropy ? "entropy" : "gini"; }

Criterion criterion_from_string(std::string_view name) {
    if (name == "entropy") return Criterion::entropy;
    if (name == "gini") return Criterion::gini;
    throw Error("unknown criterion: " + std::string(name));
}

namespace {

double total_of(std::span<const double> counts) {
    double n = 0.0;
    for (double c : counts) {
        if (c < 0.0) throw Error("class counts must be >= 0");
        n += c;
    }
    if (n <= 0.0) throw Error("class counts are all zero");
    return n;
}

// Minimum decrease treated as a real improvement; guards against splits
// produced by rounding noise in the impurity sums.
constexpr double kMinGain = 1e-12;

} // namespace

double entropy_impurity(std::span<const double> counts) {
    const double n = total_of(counts);
    double h = 0.0;
    for (double c : counts) {
        if (c > 0.0) h -= (c / n) * std::log2(c / n);
    }
    return h;
}

double gini_impurity(std::span<const double> counts) {
    const double n = total_of(counts);
    double s = 0.0;
    for (double c : counts) s += (c / n) * (c / n);
    return 1.0 - s;
}

double impurity(Criterion c, std::span<const double> counts) {
    return c == Criterion::entropy ? entropy_impurity(counts) : gini_impurity(counts);
}

TreeModel::TreeModel(std::vector<TreeNode> nodes, int n_features, int n_classes, TreeParams params)
    : nodes_(std::move(nodes)), n_features_(n_features), n_classes_(n_classes), params_(params) {
    if (nodes_.empty()) throw Error("tree has no nodes");
    for (const auto& node : nodes_) {
        if (static_cast<int>(node.counts.size()) != n_classes_) throw Error("tree node class count mismatch");
        if (node.is_leaf()) continue;
        const auto size = static_cast<int>(nodes_.size());
        if (node.feature >= n_features_ || node.left <= 0 || node.right <= 0 || node.left >= size ||
            node.right >= size) {
            throw Error("tree node references are out of range");
        }
    }
}

int TreeModel::depth() const {
    int d = 0;
    for (const auto& node : nodes_) d = std::max(d, node.depth);
    return d;
}

const TreeNode& TreeModel::leaf_for(std::span<const double> row) const {
    if (static_cast<int>(row.size()) != n_features_) throw Error("tree predict: width mismatch");
    const TreeNode* node = &nodes_.front();
    while (!node->is_leaf()) {
        const double v = row[static_cast<std::size_t>(node->feature)];
        node = &nodes_[static_cast<std::size_t>(v <= node->threshold ? node->left : node->right)];
    }
    return *node;
}

int TreeModel::predict_one(std::span<const double> row) const {
    const auto& counts = leaf_for(row).counts;
    return static_cast<int>(std::max_element(counts.begin(), counts.end()) - counts.begin());
}

std::vector<int> TreeModel::predict(const Eigen::MatrixXd& x) const {
    if (x.cols() != n_features_) throw Error("tree predict: width mismatch");
    std::vector<int> out(static_cast<std::size_t>(x.rows()));
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
        out[static_cast<std::size_t>(i)] = predict_one(row);
    }
    return out;
}

Eigen::MatrixXd TreeModel::predict_proba(const Eigen::MatrixXd& x) const {
    if (x.cols() != n_features_) throw Error("tree predict: width mismatch");
    Eigen::MatrixXd out(x.rows(), n_classes_);
    std::vector<double> row(static_cast<std::size_t>(x.cols()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) row[static_cast<std::size_t>(j)] = x(i, j);
        const auto& counts = leaf_for(row).counts;
        const double n = std::accumulate(counts.begin(), counts.end(), 0.0);
        for (int c = 0; c < n_classes_; ++c) out(i, c) = counts[static_cast<std::size_t>(c)] / n;
    }
    return out;
}

namespace {

struct Split {
    int feature = -1;
    double threshold = 0.0;
    double gain = -std::numeric_limits<double>::infinity();
};

class Builder {
public:
    Builder(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes, const TreeParams& params)
        : x_(x), y_(y), n_classes_(n_classes), params_(params) {}

    std::vector<TreeNode> build() {
        std::vector<std::size_t> all(static_cast<std::size_t>(x_.rows()));
        std::iota(all.begin(), all.end(), 0);
        grow(all, 0);
        return std::move(nodes_);
    }

private:
    std::vector<double> class_counts(const std::vector<std::size_t>& idx) const {
        std::vector<double> counts(static_cast<std::size_t>(n_classes_), 0.0);
        for (auto i : idx) counts[static_cast<std::size_t>(y_[i])] += 1.0;
        return counts;
    }

    Split best_split(const std::vector<std::size_t>& idx, const std::vector<double>& counts) const {
        const double n = static_cast<double>(idx.size());
        const double parent = impurity(params_.criterion, counts);
        const auto min_leaf = static_cast<std::size_t>(std::max(1, params_.min_samples_leaf));
        Split best;
        std::vector<std::size_t> order(idx);
        std::vector<double> left(counts.size());
        std::vector<double> right(counts.size());

        for (Eigen::Index f = 0; f < x_.cols(); ++f) {
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return x_(static_cast<Eigen::Index>(a), f) < x_(static_cast<Eigen::Index>(b), f);
            });
            std::fill(left.begin(), left.end(), 0.0);
            right = counts;
            for (std::size_t pos = 0; pos + 1 < order.size(); ++pos) {
                const int label = y_[order[pos]];
                left[static_cast<std::size_t>(label)] += 1.0;
                right[static_cast<std::size_t>(label)] -= 1.0;
                const double lo = x_(static_cast<Eigen::Index>(order[pos]), f);
                const double hi = x_(static_cast<Eigen::Index>(order[pos + 1]), f);
                if (!(lo < hi)) continue;
                const std::size_t n_left = pos + 1;
                const std::size_t n_right = order.size() - n_left;
                if (n_left < min_leaf || n_right < min_leaf) continue;

                const double child = (static_cast<double>(n_left) / n) * impurity(params_.criterion, left) +
                                     (static_cast<double>(n_right) / n) * impurity(params_.criterion, right);
                const double gain = parent - child;
                if (gain > best.gain + kMinGain) {
                    best.feature = static_cast<int>(f);
                    best.threshold = lo + (hi - lo) / 2.0;
                    best.gain = gain;
                }
            }
        }
        return best;
    }

    // Returns true if the subtree rooted at the new node holds a split with
    // positive gain. A zero-gain split (XOR-like data, where no single cut
    // helps) is kept only when some split below it has positive gain.
    bool grow(const std::vector<std::size_t>& idx, int depth) {
        const auto id = nodes_.size();
        nodes_.push_back(TreeNode{});
        nodes_.back().depth = depth;
        nodes_.back().counts = class_counts(idx);
        const auto& counts = nodes_.back().counts;

        const bool pure = std::count_if(counts.begin(), counts.end(), [](double c) { return c > 0.0; }) <= 1;
        if (pure || depth >= params_.max_depth) return false;

        const Split split = best_split(idx, counts);
        if (split.feature < 0) return false;

        std::vector<std::size_t> left_idx, right_idx;
        for (auto i : idx) {
            (x_(static_cast<Eigen::Index>(i), split.feature) <= split.threshold ? left_idx : right_idx).push_back(i);
        }
        nodes_[id].feature = split.feature;
        nodes_[id].threshold = split.threshold;
        nodes_[id].left = static_cast<int>(nodes_.size());
        const bool left_gain = grow(left_idx, depth + 1);
        nodes_[id].right = static_cast<int>(nodes_.size());
        const bool right_gain = grow(right_idx, depth + 1);

        const bool positive = split.gain > kMinGain;
        if (positive || left_gain || right_gain) return true;
        nodes_.resize(id + 1);
        nodes_[id].feature = -1;
        nodes_[id].threshold = 0.0;
        nodes_[id].left = nodes_[id].right = -1;
        return false;
    }

    const Eigen::MatrixXd& x_;
    std::span<const int> y_;
    int n_classes_;
    TreeParams params_;
    std::vector<TreeNode> nodes_;
};

} // namespace

TreeModel tree_fit(const Eigen::MatrixXd& x, std::span<const int> y, int n_classes, const TreeParams& params) {
    if (x.rows() == 0) throw Error("tree fit: empty data");
    if (static_cast<Eigen::Index>(y.size()) != x.rows()) throw Error("tree fit: label count mismatch");
    if (n_classes < 1) throw Error("tree fit: need at least one class");
    if (params.max_depth < 0) throw Error("tree fit: max_depth must be >= 0");
    for (int label : y) {
        if (label < 0 || label >= n_classes) throw Error("tree fit: label out of range");
    }
    if (!x.allFinite()) throw Error("tree fit: non-finite feature values");
    Builder builder(x, y, n_classes, params);
    return TreeModel(builder.build(), static_cast<int>(x.cols()), n_classes, params);
}

std::vector<int> tree_predict(const TreeModel& model, const Eigen::MatrixXd& x) { return model.predict(x); }

double accuracy(std::span<const int> truth, std::span<const int> predicted) {
    if (truth.size() != predicted.size() || truth.empty()) throw Error("accuracy: size mismatch");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) hits += truth[i] == predicted[i] ? 1 : 0;
    return static_cast<double>(hits) / static_cast<double>(truth.size());
}

} // namespace cxr::learn
