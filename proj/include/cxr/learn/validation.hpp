#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cxr/learn/pca.hpp"
#include "cxr/learn/table.hpp"
#include "cxr/learn/tree.hpp"

namespace cxr::learn {

struct Fold {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Each class's members are shuffled with the seeded generator, then dealt
/// round-robin across folds, continuing the deal position from the previous
/// class. Per-class fold counts differ by at most one.
std::vector<Fold> stratified_kfold(std::span<const int> y, int k, std::uint64_t seed);

/// Standardize -> optional PCA -> tree. All preprocessing statistics come
/// from the data passed to fit.
struct ClassifierParams {
    TreeParams tree;
    int pca_components = 3; // 0 disables PCA
    bool standardize = true;
};

struct ClassifierModel {
    std::vector<std::string> classes;
    std::vector<std::string> feature_names;
    Standardizer scaler;
    std::optional<PcaModel> pca;
    TreeModel tree;

    Eigen::MatrixXd preprocess(const Eigen::MatrixXd& x) const;
    std::vector<int> predict(const Eigen::MatrixXd& x) const;
    Eigen::MatrixXd predict_proba(const Eigen::MatrixXd& x) const;
};

ClassifierModel fit_classifier(const Eigen::MatrixXd& x, std::span<const int> y,
                               const std::vector<std::string>& classes, const ClassifierParams& params);

struct Summary {
    double mean = 0.0;
    double std = 0.0; // population
    double min = 0.0;
    double max = 0.0;

    static Summary of(std::span<const double> values);
    /// "m ± s", two decimals for the mean and three for the deviation.
    std::string mean_pm_std() const;
};

struct GridCell {
    Criterion criterion = Criterion::entropy;
    int max_depth = 0;
    std::vector<double> fold_scores;
    Summary summary;
};

struct CvReport {
    std::vector<double> fold_scores; // best cell
    Summary summary;
    Criterion best_criterion = Criterion::entropy;
    int best_depth = 0;
    int cv_folds = 0;
    std::uint64_t seed = 0;
    std::vector<GridCell> cells;
};

struct GridSpec {
    std::vector<int> depths;
    std::vector<Criterion> criteria{Criterion::entropy, Criterion::gini};
    int cv_folds = 3;
    std::uint64_t seed = 0;
    int pca_components = 3;
    bool standardize = true;
    int min_samples_leaf = 1;
};

struct GridSearchResult {
    CvReport report;
    ClassifierModel model; // refit on all data with the best cell
};

/// Stratified k-fold over every (criterion, depth) cell. The best cell has
/// the highest mean accuracy; ties go to the smaller depth, then entropy
/// before gini.
GridSearchResult grid_search(const Eigen::MatrixXd& x, std::span<const int> y,
                             const std::vector<std::string>& classes, const GridSpec& spec);

} // namespace cxr::learn
