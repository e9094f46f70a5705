#pragma once

#include <Eigen/Dense>

namespace cxr::learn {

struct PcaModel {
    Eigen::RowVectorXd mean;
    Eigen::MatrixXd components;         // n_components x D, orthonormal rows
    Eigen::VectorXd explained_variance; // descending

    int n_components() const { return static_cast<int>(components.rows()); }
};

/// SVD of the mean-centered data. explained_variance = s^2 / (N - 1). Each
/// component is signed so its largest-magnitude entry is positive.
PcaModel pca_fit(const Eigen::MatrixXd& x, int n_components);

/// (x - mean) * components^T
Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x);

} // namespace cxr::learn
