#include <gtest/gtest.h>

#include <Eigen/Dense>
#include <cmath>

#include "test_support.hpp"
#include "trajal/pca.hpp"

using namespace trajal;

namespace {

// Independent route: explicit covariance with Eigen's self-adjoint solver.
struct Oracle {
    Eigen::VectorXd values;  // descending
    Eigen::MatrixXd vectors; // columns
};

Oracle brute_force(const Matrix& x) {
    const auto n = static_cast<Eigen::Index>(x.rows());
    const auto d = static_cast<Eigen::Index>(x.cols());
    Eigen::MatrixXd m(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j) m(i, j) = x(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    const Eigen::MatrixXd centered = m.rowwise() - m.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    return {solver.eigenvalues().reverse(), solver.eigenvectors().rowwise().reverse()};
}

} // namespace

TEST(Pca, DiagonalLine) {
    const auto model = pca_fit(Matrix{{0, 0}, {1, 1}, {2, 2}}, 1);
    EXPECT_NEAR(model.components(0, 0), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(model.components(0, 1), 1.0 / std::sqrt(2.0), 1e-12);
    EXPECT_NEAR(model.explained_variance_ratio[0], 1.0, 1e-10);
    EXPECT_NEAR(model.eigenvalues[0], 2.0, 1e-12); // var(x)+var(y) = 1 + 1
}

TEST(Pca, FullBasisReconstructs) {
    const Matrix x = support::random_matrix(30, 4, 3);
    const auto model = pca_fit(x, 4);
    const Matrix scores = pca_transform(model, x);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t j = 0; j < 4; ++j) {
            double v = model.mean[j];
            for (std::size_t c = 0; c < 4; ++c) v += scores(i, c) * model.components(c, j);
            EXPECT_NEAR(v, x(i, j), 1e-8);
        }
    }
}

TEST(Pca, IsotropicRatiosNearHalf) {
    const Matrix x = support::random_matrix(10'000, 2, 99);
    const auto model = pca_fit(x, 2);
    EXPECT_NEAR(model.explained_variance_ratio[0], 0.5, 0.05);
    EXPECT_NEAR(model.explained_variance_ratio[1], 0.5, 0.05);
}

TEST(Pca, TransformProperties) {
    const Matrix x = support::random_matrix(80, 5, 17, 3.0);
    const auto model = pca_fit(x, 3);
    const Matrix s = pca_transform(model, x);
    for (std::size_t c = 0; c < 3; ++c) {
        double mean = 0.0;
        for (std::size_t i = 0; i < s.rows(); ++i) mean += s(i, c);
        mean /= static_cast<double>(s.rows());
        EXPECT_NEAR(mean, 0.0, 1e-9);
        double var = 0.0;
        for (std::size_t i = 0; i < s.rows(); ++i) var += (s(i, c) - mean) * (s(i, c) - mean);
        var /= static_cast<double>(s.rows() - 1);
        EXPECT_NEAR(var, model.eigenvalues[c], 1e-8);
    }
    Matrix mean_row(1, 5);
    for (std::size_t j = 0; j < 5; ++j) mean_row(0, j) = model.mean[j];
    const Matrix origin = pca_transform(model, mean_row);
    for (double v : origin.data()) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(Pca, OracleEquivalenceAndOrthonormality) {
    for (std::uint64_t seed = 100; seed < 120; ++seed) {
        const Matrix x = support::random_matrix(50, 6, seed);
        const auto model = pca_fit(x, 6);
        const Oracle oracle = brute_force(x);
        double total = 0.0;
        for (std::size_t c = 0; c < 6; ++c) total += oracle.values(static_cast<Eigen::Index>(c));
        for (std::size_t c = 0; c < 6; ++c) {
            const auto ec = static_cast<Eigen::Index>(c);
            EXPECT_NEAR(model.eigenvalues[c], oracle.values(ec), 1e-9);
            EXPECT_NEAR(model.explained_variance_ratio[c], oracle.values(ec) / total, 1e-9);
            double dot = 0.0;
            for (std::size_t j = 0; j < 6; ++j) dot += model.components(c, j) * oracle.vectors(static_cast<Eigen::Index>(j), ec);
            const double sign = dot < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < 6; ++j) {
                EXPECT_NEAR(model.components(c, j), sign * oracle.vectors(static_cast<Eigen::Index>(j), ec), 1e-6);
            }
            if (c + 1 < 6) EXPECT_GE(model.eigenvalues[c], model.eigenvalues[c + 1]);
            EXPECT_GE(model.eigenvalues[c], -1e-10);
        }
        for (std::size_t a = 0; a < 6; ++a) {
            for (std::size_t b = 0; b < 6; ++b) {
                double dot = 0.0;
                for (std::size_t j = 0; j < 6; ++j) dot += model.components(a, j) * model.components(b, j);
                EXPECT_NEAR(dot, a == b ? 1.0 : 0.0, 1e-8);
            }
        }
        double ratio_sum = 0.0;
        for (double r : model.explained_variance_ratio) ratio_sum += r;
        EXPECT_LE(ratio_sum, 1.0 + 1e-10);
    }
}

TEST(Pca, SignConventionLargestEntryPositive) {
    const auto model = pca_fit(support::random_matrix(40, 5, 4), 5);
    for (std::size_t c = 0; c < 5; ++c) {
        std::size_t arg = 0;
        for (std::size_t j = 1; j < 5; ++j)
            if (std::abs(model.components(c, j)) > std::abs(model.components(c, arg))) arg = j;
        EXPECT_GT(model.components(c, arg), 0.0);
    }
}

TEST(Pca, FirstComponentIsVarianceMaximal) {
    const Matrix x = support::random_matrix(60, 4, 8, 2.0);
    const auto model = pca_fit(x, 1);
    Rng rng(1);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> u(4);
        double norm = 0.0;
        for (double& v : u) {
            v = rng.normal();
            norm += v * v;
        }
        norm = std::sqrt(norm);
        double mean = 0.0;
        std::vector<double> proj(x.rows());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            for (std::size_t j = 0; j < 4; ++j) proj[i] += x(i, j) * u[j] / norm;
            mean += proj[i];
        }
        mean /= static_cast<double>(x.rows());
        double var = 0.0;
        for (double p : proj) var += (p - mean) * (p - mean);
        var /= static_cast<double>(x.rows() - 1);
        EXPECT_LE(var, model.eigenvalues[0] + 1e-8);
    }
}

TEST(Pca, Errors) {
    const Matrix x = support::random_matrix(5, 3, 1);
    EXPECT_THROW(pca_fit(x, 0), Error);
    EXPECT_THROW(pca_fit(x, 4), Error);
    EXPECT_THROW(pca_fit(Matrix{{1.0, 2.0}}, 1), Error);
    Matrix bad = x;
    bad(0, 0) = std::nan("");
    try {
        pca_fit(bad, 2);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::numeric);
    }
    const auto model = pca_fit(x, 2);
    EXPECT_THROW(pca_transform(model, support::random_matrix(2, 4, 1)), Error);
}

TEST(Pca, CascadeWidth) {
    EXPECT_EQ(cascade_width(6, 100), 3u);
    EXPECT_EQ(cascade_width(2, 100), 2u);
    EXPECT_EQ(cascade_width(3, 100), 2u);
    EXPECT_EQ(cascade_width(10, 4), 3u);
    EXPECT_EQ(cascade_width(20, 100), 10u);
}

TEST(Pca, DeterministicBits) {
    const Matrix x = support::random_matrix(50, 6, 77);
    const auto a = pca_fit(x, 3);
    const auto b = pca_fit(x, 3);
    EXPECT_EQ(a.components, b.components);
    EXPECT_EQ(a.eigenvalues, b.eigenvalues);
}
