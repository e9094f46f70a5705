#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cxr::learn {

/// N samples x D named features, plus optional string labels and ids.
struct FeatureTable {
    std::vector<std::string> ids;
    std::vector<std::string> columns;
    Eigen::MatrixXd values;
    std::vector<std::string> labels; // empty when unlabeled

    Eigen::Index rows() const { return values.rows(); }
    Eigen::Index cols() const { return values.cols(); }
    bool labeled() const { return !labels.empty(); }

    /// Throws cxr::Error on non-finite values or inconsistent sizes.
    void validate() const;
};

/// Sorted distinct label names; class id = position in that list, so the
/// smallest id is the lexicographically smallest label.
struct LabelEncoding {
    std::vector<std::string> classes;
    std::vector<int> ids;
};

LabelEncoding encode_labels(const std::vector<std::string>& labels);

/// Per-column z-score. Columns with zero spread are only centered.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd scale;

    static Standardizer fit(const Eigen::MatrixXd& x);
    static Standardizer identity(Eigen::Index cols);
    Eigen::MatrixXd transform(const Eigen::MatrixXd& x) const;
};

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows);

} // namespace cxr::learn
