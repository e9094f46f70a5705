#include <doctest.h>

#include <cmath>

#include "cxr/error.hpp"
#include "cxr/learn/pca.hpp"
#include "cxr/learn/table.hpp"
#include "unit/learn_oracles.hpp"

using namespace cxr;
using namespace cxr::learn;

TEST_CASE("pca on points along y = 2x") {
    Eigen::MatrixXd x(5, 2);
    for (int i = 0; i < 5; ++i) {
        x(i, 0) = i - 1.5;
        x(i, 1) = 2.0 * (i - 1.5);
    }
    const PcaModel m = pca_fit(x, 1);
    CHECK(std::abs(m.components(0, 0) - 1.0 / std::sqrt(5.0)) <= 1e-12);
    CHECK(std::abs(m.components(0, 1) - 2.0 / std::sqrt(5.0)) <= 1e-12);

    const PcaModel both = pca_fit(x, 2);
    CHECK(std::abs(both.explained_variance(1)) <= 1e-12);
}

TEST_CASE("pca of identical rows") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Constant(6, 3, 1.7);
    const PcaModel m = pca_fit(x, 3);
    for (int c = 0; c < 3; ++c) CHECK(m.explained_variance(c) == 0.0);
    const Eigen::MatrixXd gram = m.components * m.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("pca matches the covariance eigendecomposition oracle") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Eigen::MatrixXd x = oracle::gaussian_table(50, 5, seed);
        const PcaModel m = pca_fit(x, 5);
        const oracle::Eigenpairs ref = oracle::covariance_eigen(x);
        for (int c = 0; c < 5; ++c) {
            CHECK(std::abs(m.explained_variance(c) - ref.values[static_cast<std::size_t>(c)]) <= 1e-8);
            for (int j = 0; j < 5; ++j) {
                CHECK(std::abs(m.components(c, j) - ref.vectors[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)]) <=
                      1e-8);
            }
        }
        // Projection against the oracle basis.
        const Eigen::MatrixXd z = pca_transform(m, x);
        const Eigen::RowVectorXd mean = x.colwise().mean();
        for (int i = 0; i < 50; i += 7) {
            for (int c = 0; c < 5; ++c) {
                double p = 0.0;
                for (int j = 0; j < 5; ++j) p += (x(i, j) - mean(j)) * ref.vectors[static_cast<std::size_t>(c)][static_cast<std::size_t>(j)];
                CHECK(std::abs(z(i, c) - p) <= 1e-8);
            }
        }
    }
}

TEST_CASE("pca transform properties") {
    const Eigen::MatrixXd x = oracle::gaussian_table(40, 4, 99);
    const PcaModel m = pca_fit(x, 4);

    const Eigen::MatrixXd at_mean = pca_transform(m, m.mean);
    CHECK(at_mean.cwiseAbs().maxCoeff() <= 1e-12);

    const Eigen::MatrixXd z = pca_transform(m, x);
    for (int c = 0; c < 4; ++c) {
        const double mu = z.col(c).mean();
        const double var = (z.col(c).array() - mu).square().sum() / (x.rows() - 1);
        CHECK(std::abs(var - m.explained_variance(c)) <= 1e-8);
    }

    const Eigen::MatrixXd gram = m.components * m.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() <= 1e-10);
    const Eigen::MatrixXd centered = x.rowwise() - m.mean;
    CHECK((z * m.components - centered).cwiseAbs().maxCoeff() <= 1e-8);

    CHECK_THROWS_AS(pca_transform(m, Eigen::MatrixXd::Zero(2, 3)), Error);
    CHECK_THROWS_AS(pca_fit(x, 5), Error);
    CHECK_THROWS_AS(pca_fit(Eigen::MatrixXd::Zero(1, 3), 1), Error);
}

TEST_CASE("standardizer and label encoding") {
    Eigen::MatrixXd x(3, 2);
    x << 1, 5, 2, 5, 3, 5;
    const Standardizer s = Standardizer::fit(x);
    const Eigen::MatrixXd z = s.transform(x);
    CHECK(std::abs(z.col(0).mean()) <= 1e-15);
    CHECK(z.col(1).cwiseAbs().maxCoeff() == 0.0);

    const LabelEncoding enc = encode_labels({"type2", "normal", "type1", "normal"});
    CHECK(enc.classes == std::vector<std::string>{"normal", "type1", "type2"});
    CHECK(enc.ids == std::vector<int>{2, 0, 1, 0});
}
