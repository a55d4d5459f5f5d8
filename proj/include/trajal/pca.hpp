#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "trajal/error.hpp"
#include "trajal/matrix.hpp"

namespace trajal {

struct SymmetricEigen {
    std::vector<double> values; // descending
    Matrix vectors;             // row j is the eigenvector for values[j]
};

/// Cyclic Jacobi rotations on a symmetric matrix. Sweeps run in a fixed
/// (p, q) order so the result is deterministic.
inline SymmetricEigen jacobi_eigen(Matrix a, int max_sweeps = 100) {
    const std::size_t n = a.rows();
    if (n != a.cols()) fail(ErrorKind::dimension, "eigen: matrix is not square");
    Matrix v(n, n);
    for (std::size_t i = 0; i < n; ++i) v(i, i) = 1.0;

    double scale = 0.0;
    for (double x : a.data()) scale = std::max(scale, std::abs(x));
    const double tol = scale == 0.0 ? 0.0 : scale * 1e-15;

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off = std::max(off, std::abs(a(p, q)));
        if (off <= tol) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) <= tol * 1e-3) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return a(i, i) > a(j, j); });

    SymmetricEigen out{std::vector<double>(n), Matrix(n, n)};
    for (std::size_t r = 0; r < n; ++r) {
        out.values[r] = a(order[r], order[r]);
        for (std::size_t k = 0; k < n; ++k) out.vectors(r, k) = v(k, order[r]);
    }
    return out;
}

struct PCAModel {
    std::vector<double> mean;
    Matrix components; // k x d, orthonormal rows
    std::vector<double> eigenvalues;
    std::vector<double> explained_variance_ratio;

    std::size_t n_components() const noexcept { return components.rows(); }
    std::size_t n_features() const noexcept { return mean.size(); }
};

/// Sample covariance (1/(n-1)) of the mean-centred data.
inline Matrix covariance(const Matrix& x, std::vector<double>* mean_out = nullptr) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    std::vector<double> mean(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) mean[j] += x(i, j);
    for (double& m : mean) m /= static_cast<double>(n);

    Matrix cov(d, d);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t p = 0; p < d; ++p) {
            const double cp = x(i, p) - mean[p];
            for (std::size_t q = p; q < d; ++q) cov(p, q) += cp * (x(i, q) - mean[q]);
        }
    }
    const double denom = static_cast<double>(n - 1);
    for (std::size_t p = 0; p < d; ++p) {
        for (std::size_t q = p; q < d; ++q) {
            cov(p, q) /= denom;
            cov(q, p) = cov(p, q);
        }
    }
    if (mean_out) *mean_out = std::move(mean);
    return cov;
}

inline PCAModel pca_fit(const Matrix& x, std::size_t k) {
    const std::size_t n = x.rows();
    const std::size_t d = x.cols();
    if (n < 2) fail(ErrorKind::dimension, "PCA needs at least 2 rows", {{"rows", n}});
    if (k < 1 || k > std::min(d, n)) {
        fail(ErrorKind::dimension, "PCA: k=" + std::to_string(k) + " outside [1, min(d, n)]", {{"k", k}, {"d", d}, {"n", n}});
    }
    if (!x.all_finite()) fail(ErrorKind::numeric, "PCA: non-finite input");

    PCAModel model;
    const Matrix cov = covariance(x, &model.mean);
    double trace = 0.0;
    for (std::size_t j = 0; j < d; ++j) trace += cov(j, j);

    const SymmetricEigen eig = jacobi_eigen(cov);
    model.components = Matrix(k, d);
    for (std::size_t r = 0; r < k; ++r) {
        auto src = eig.vectors.row(r);
        // Sign convention: the entry of largest magnitude is positive (first one on ties).
        std::size_t arg = 0;
        for (std::size_t j = 1; j < d; ++j) {
            if (std::abs(src[j]) > std::abs(src[arg])) arg = j;
        }
        const double sign = src[arg] < 0.0 ? -1.0 : 1.0;
        for (std::size_t j = 0; j < d; ++j) model.components(r, j) = sign * src[j];
        model.eigenvalues.push_back(eig.values[r]);
        model.explained_variance_ratio.push_back(trace > 0.0 ? eig.values[r] / trace : 0.0);
    }
    return model;
}

inline Matrix pca_transform(const PCAModel& model, const Matrix& x) {
    if (x.cols() != model.n_features()) {
        fail(ErrorKind::dimension, "PCA transform: expected " + std::to_string(model.n_features()) + " columns, got " +
                                       std::to_string(x.cols()));
    }
    const std::size_t k = model.n_components();
    Matrix out(x.rows(), k);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t c = 0; c < k; ++c) {
            double s = 0.0;
            for (std::size_t j = 0; j < x.cols(); ++j) s += (x(i, j) - model.mean[j]) * model.components(c, j);
            out(i, c) = s;
        }
    }
    return out;
}

/// Width of the PCA stage in front of t-SNE: floor(d/2), clamped to
/// [min(2, d), min(d, n-1)] so tiny tables still run.
inline std::size_t cascade_width(std::size_t d, std::size_t n) {
    std::size_t k = d / 2;
    k = std::max(k, std::min<std::size_t>(2, d));
    k = std::min(k, std::min(d, n > 1 ? n - 1 : 1));
    return std::max<std::size_t>(k, 1);
}

} // namespace trajal
