#include "cxr/learn/validation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "cxr/error.hpp"
#include "cxr/random.hpp"

namespace cxr::learn {

std::vector<Fold> stratified_kfold(std::span<const int> y, int k, std::uint64_t seed) {
    if (k < 2) throw Error("stratified k-fold: k must be >= 2");
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < y.size(); ++i) members[y[i]].push_back(i);
    for (const auto& [label, idx] : members) {
        if (static_cast<int>(idx.size()) < k) {
            throw Error("stratified k-fold: class " + std::to_string(label) + " has " +
                        std::to_string(idx.size()) + " members, fewer than k=" + std::to_string(k));
        }
    }

    Rng rng(seed);
    std::vector<Fold> folds(static_cast<std::size_t>(k));
    std::size_t deal = 0;
    for (auto& [label, idx] : members) {
        rng.shuffle(idx.begin(), idx.end());
        for (auto i : idx) {
            folds[deal % static_cast<std::size_t>(k)].test.push_back(i);
            ++deal;
        }
    }
    for (auto& fold : folds) {
        std::sort(fold.test.begin(), fold.test.end());
        std::vector<bool> in_test(y.size(), false);
        for (auto i : fold.test) in_test[i] = true;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (!in_test[i]) fold.train.push_back(i);
        }
    }
    return folds;
}

Eigen::MatrixXd ClassifierModel::preprocess(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd z = scaler.transform(x);
    return pca ? pca_transform(*pca, z) : z;
}

std::vector<int> ClassifierModel::predict(const Eigen::MatrixXd& x) const { return tree.predict(preprocess(x)); }

Eigen::MatrixXd ClassifierModel::predict_proba(const Eigen::MatrixXd& x) const {
    return tree.predict_proba(preprocess(x));
}

namespace {

struct Preprocessed {
    Standardizer scaler;
    std::optional<PcaModel> pca;
    Eigen::MatrixXd train;
};

Preprocessed fit_preprocessing(const Eigen::MatrixXd& x, int pca_components, bool standardize) {
    Preprocessed p;
    p.scaler = standardize ? Standardizer::fit(x) : Standardizer::identity(x.cols());
    p.train = p.scaler.transform(x);
    if (pca_components > 0) {
        const auto usable = std::min<Eigen::Index>({pca_components, x.rows() - 1, x.cols()});
        if (usable < 1) throw Error("too few samples for PCA");
        p.pca = pca_fit(p.train, static_cast<int>(usable));
        p.train = pca_transform(*p.pca, p.train);
    }
    return p;
}

Eigen::MatrixXd apply_preprocessing(const Preprocessed& p, const Eigen::MatrixXd& x) {
    Eigen::MatrixXd z = p.scaler.transform(x);
    return p.pca ? pca_transform(*p.pca, z) : z;
}

std::vector<int> select(std::span<const int> y, const std::vector<std::size_t>& idx) {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) out.push_back(y[i]);
    return out;
}

} // namespace

ClassifierModel fit_classifier(const Eigen::MatrixXd& x, std::span<const int> y,
                               const std::vector<std::string>& classes, const ClassifierParams& params) {
    Preprocessed p = fit_preprocessing(x, params.pca_components, params.standardize);
    ClassifierModel model;
    model.classes = classes;
    model.scaler = std::move(p.scaler);
    model.pca = std::move(p.pca);
    model.tree = tree_fit(p.train, y, static_cast<int>(classes.size()), params.tree);
    return model;
}

Summary Summary::of(std::span<const double> values) {
    if (values.empty()) throw Error("summary of an empty score list");
    Summary s;
    const auto n = static_cast<double>(values.size());
    s.min = *std::min_element(values.begin(), values.end());
    s.max = *std::max_element(values.begin(), values.end());
    for (double v : values) s.mean += v;
    s.mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / n);
    // Keep min <= mean <= max exact under rounding.
    s.mean = std::clamp(s.mean, s.min, s.max);
    return s;
}

std::string Summary::mean_pm_std() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f \xC2\xB1 %.3f", mean, std);
    return buf;
}

GridSearchResult grid_search(const Eigen::MatrixXd& x, std::span<const int> y,
                             const std::vector<std::string>& classes, const GridSpec& spec) {
    if (spec.depths.empty() || spec.criteria.empty()) throw Error("grid search: grids must be nonempty");
    if (static_cast<Eigen::Index>(y.size()) != x.rows()) throw Error("grid search: label count mismatch");

    const auto folds = stratified_kfold(y, spec.cv_folds, spec.seed);
    std::vector<Preprocessed> train_sets;
    std::vector<Eigen::MatrixXd> test_sets;
    std::vector<std::vector<int>> train_labels, test_labels;
    for (const auto& fold : folds) {
        train_sets.push_back(fit_preprocessing(select_rows(x, fold.train), spec.pca_components, spec.standardize));
        test_sets.push_back(apply_preprocessing(train_sets.back(), select_rows(x, fold.test)));
        train_labels.push_back(select(y, fold.train));
        test_labels.push_back(select(y, fold.test));
    }

    std::vector<int> depths = spec.depths;
    std::sort(depths.begin(), depths.end());
    depths.erase(std::unique(depths.begin(), depths.end()), depths.end());
    std::vector<Criterion> criteria = spec.criteria;
    std::sort(criteria.begin(), criteria.end());
    criteria.erase(std::unique(criteria.begin(), criteria.end()), criteria.end());

    CvReport report;
    report.cv_folds = spec.cv_folds;
    report.seed = spec.seed;
    const GridCell* best = nullptr;
    for (int depth : depths) {
        for (Criterion criterion : criteria) {
            GridCell cell{criterion, depth, {}, {}};
            const TreeParams params{criterion, depth, spec.min_samples_leaf};
            for (std::size_t f = 0; f < folds.size(); ++f) {
                const TreeModel tree = tree_fit(train_sets[f].train, train_labels[f],
                                                static_cast<int>(classes.size()), params);
                cell.fold_scores.push_back(accuracy(test_labels[f], tree.predict(test_sets[f])));
            }
            cell.summary = Summary::of(cell.fold_scores);
            report.cells.push_back(std::move(cell));
        }
    }
    for (const auto& cell : report.cells) {
        if (!best || cell.summary.mean > best->summary.mean) best = &cell;
    }

    report.fold_scores = best->fold_scores;
    report.summary = best->summary;
    report.best_criterion = best->criterion;
    report.best_depth = best->max_depth;

    ClassifierParams final_params;
    final_params.tree = TreeParams{report.best_criterion, report.best_depth, spec.min_samples_leaf};
    final_params.pca_components = spec.pca_components;
    final_params.standardize = spec.standardize;
    GridSearchResult result{std::move(report), fit_classifier(x, y, classes, final_params)};
    return result;
}

} // namespace cxr::learn
