#include "cxr/learn/pca.hpp"

#include <Eigen/SVD>

#include "cxr/error.hpp"

namespace cxr::learn {

PcaModel pca_fit(const Eigen::MatrixXd& x, int n_components) {
    const Eigen::Index n = x.rows();
    const Eigen::Index d = x.cols();
    if (n < 2) throw Error("PCA needs at least 2 samples");
    if (n_components < 1 || n_components > std::min<Eigen::Index>(n - 1, d)) {
        throw Error("PCA n_components must be in [1, min(N - 1, D)]");
    }

    PcaModel model;
    model.mean = x.colwise().mean();
    const Eigen::MatrixXd centered = x.rowwise() - model.mean;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(centered, Eigen::ComputeFullV);

    model.components = svd.matrixV().leftCols(n_components).transpose();
    model.explained_variance.resize(n_components);
    const auto& sv = svd.singularValues();
    for (int c = 0; c < n_components; ++c) {
        const double s = c < sv.size() ? sv(c) : 0.0;
        model.explained_variance(c) = s * s / static_cast<double>(n - 1);

        Eigen::Index argmax = 0;
        model.components.row(c).cwiseAbs().maxCoeff(&argmax);
        if (model.components(c, argmax) < 0.0) model.components.row(c) *= -1.0;
    }
    return model;
}

Eigen::MatrixXd pca_transform(const PcaModel& model, const Eigen::MatrixXd& x) {
    if (x.cols() != model.mean.size()) throw Error("PCA transform: width mismatch");
    return (x.rowwise() - model.mean) * model.components.transpose();
}

} // namespace cxr::learn
