#include "cxr/learn/table.hpp"

#include <algorithm>
#include <cmath>

#include "cxr/error.hpp"

namespace cxr::learn {

void FeatureTable::validate() const {
    if (static_cast<Eigen::Index>(columns.size()) != values.cols()) {
        throw Error("feature table: column names do not match value width");
    }
    if (!ids.empty() && static_cast<Eigen::Index>(ids.size()) != values.rows()) {
        throw Error("feature table: id count does not match row count");
    }
    if (!labels.empty() && static_cast<Eigen::Index>(labels.size()) != values.rows()) {
        throw Error("feature table: label count does not match row count");
    }
    if (!values.allFinite()) throw Error("feature table contains non-finite values");
}

LabelEncoding encode_labels(const std::vector<std::string>& labels) {
    if (labels.empty()) throw Error("label set is empty");
    LabelEncoding enc;
    enc.classes = labels;
    std::sort(enc.classes.begin(), enc.classes.end());
    enc.classes.erase(std::unique(enc.classes.begin(), enc.classes.end()), enc.classes.end());
    enc.ids.reserve(labels.size());
    for (const auto& l : labels) {
        auto it = std::lower_bound(enc.classes.begin(), enc.classes.end(), l);
        enc.ids.push_back(static_cast<int>(it - enc.classes.begin()));
    }
    return enc;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd& x) {
    if (x.rows() == 0) throw Error("cannot standardize an empty table");
    Standardizer s;
    s.mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - s.mean;
    s.scale = (centered.array().square().colwise().sum() / static_cast<double>(x.rows())).sqrt();
    for (Eigen::Index c = 0; c < s.scale.size(); ++c) {
        if (!(s.scale(c) > 0.0)) s.scale(c) = 1.0;
    }
    return s;
}

Standardizer Standardizer::identity(Eigen::Index cols) {
    return Standardizer{Eigen::RowVectorXd::Zero(cols), Eigen::RowVectorXd::Ones(cols)};
}

Eigen::MatrixXd Standardizer::transform(const Eigen::MatrixXd& x) const {
    if (x.cols() != mean.size()) throw Error("standardizer: width mismatch");
    return (x.rowwise() - mean).array().rowwise() / scale.array();
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<std::size_t>& rows) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = x.row(static_cast<Eigen::Index>(rows[i]));
    }
    return out;
}

} // namespace cxr::learn
