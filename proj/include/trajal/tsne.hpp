#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "trajal/error.hpp"
#include "trajal/matrix.hpp"
#include "trajal/parallel.hpp"
#include "trajal/rng.hpp"

namespace trajal {

/// Optimiser settings. Defaults reproduce the reference exact t-SNE schedule
/// with the perplexity/iteration/seed triple used by the reduction endpoint.
struct TsneConfig {
    double perplexity = 40.0;
    int iterations = 400; // total, exaggeration phase included
    std::uint64_t seed = 42;
    int output_dims = 2;
    double early_exaggeration = 12.0;
    int exaggeration_iters = 100;
    double learning_rate = 200.0;
    double initial_momentum = 0.5;
    double final_momentum = 0.8;
    int momentum_switch_iter = 250;
    double min_gain = 0.01;
    unsigned threads = 1;
};

/// Symmetric joint probabilities over pairs; zero diagonal, unit sum.
struct AffinityMatrix {
    Matrix p;
};

/// Bandwidth search result for one row.
struct RowCalibration {
    double beta = 1.0; // 1 / (2 sigma^2)
    double perplexity = 0.0;
};

namespace detail {

inline Matrix pairwise_squared_distances(const Matrix& x, unsigned threads) {
    const std::size_t n = x.rows();
    Matrix d(n, n);
    parallel_for(n, threads, [&](std::size_t i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) d(i, j) = squared_distance(x.row(i), x.row(j));
        }
    });
    return d;
}

// Entropy (nats) of the row distribution at precision beta; fills probs.
inline double row_entropy(std::span<const double> dist, std::size_t self, double dmin, double beta,
                          std::span<double> probs) {
    double sum = 0.0;
    double weighted = 0.0;
    for (std::size_t j = 0; j < dist.size(); ++j) {
        if (j == self) {
            probs[j] = 0.0;
            continue;
        }
        const double shifted = dist[j] - dmin;
        const double w = std::exp(-beta * shifted);
        probs[j] = w;
        sum += w;
        weighted += shifted * w;
    }
    for (double& v : probs) v /= sum;
    return std::log(sum) + beta * weighted / sum;
}

} // namespace detail

/// Row-conditional Gaussian affinities P(j|i), each row calibrated by
/// bisection on the precision so that 2^H matches `perplexity`.
inline Matrix conditional_gaussian(const Matrix& x, double perplexity, std::vector<RowCalibration>* calibration = nullptr,
                                   unsigned threads = 1) {
    const std::size_t n = x.rows();
    if (n < 3) fail(ErrorKind::config, "t-SNE needs at least 3 points", {{"n", n}});
    if (!(perplexity > 1.0) || perplexity >= static_cast<double>(n)) {
        fail(ErrorKind::config, "perplexity must lie in (1, n)", {{"perplexity", perplexity}, {"n", n}});
    }
    const Matrix dist = detail::pairwise_squared_distances(x, threads);
    const double target = std::log(perplexity);
    constexpr double tolerance = 1e-5; // on achieved perplexity, well inside the 1e-3 contract
    constexpr int max_steps = 64;

    Matrix cond(n, n);
    std::vector<RowCalibration> calib(n);
    parallel_for(n, threads, [&](std::size_t i) {
        auto drow = dist.row(i);
        auto prow = cond.row(i);
        double dmin = std::numeric_limits<double>::infinity();
        double dsum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            dmin = std::min(dmin, drow[j]);
            dsum += drow[j];
        }
        if (perplexity >= static_cast<double>(n - 1) - tolerance) {
            // Entropy is maximal at beta = 0: the uniform row.
            const double h0 = detail::row_entropy(drow, i, dmin, 0.0, prow);
            calib[i] = {0.0, std::exp(h0)};
            return;
        }
        const double spread = dsum / static_cast<double>(n - 1) - dmin;
        double beta = spread > 0.0 ? 1.0 / spread : 1.0;
        double lo = 0.0;
        double hi = std::numeric_limits<double>::infinity();
        double h = 0.0;
        for (int step = 0; step < max_steps; ++step) {
            h = detail::row_entropy(drow, i, dmin, beta, prow);
            if (std::abs(std::exp(h) - perplexity) < tolerance) break;
            if (h > target) {
                lo = beta;
                beta = std::isinf(hi) ? beta * 2.0 : 0.5 * (beta + hi);
            } else {
                hi = beta;
                beta = 0.5 * (beta + lo);
            }
        }
        calib[i] = {beta, std::exp(h)};
    });
    if (calibration) *calibration = std::move(calib);
    return cond;
}

/// P = (P_cond + P_cond^T) / (2n).
inline AffinityMatrix symmetrize(const Matrix& cond) {
    const std::size_t n = cond.rows();
    AffinityMatrix out{Matrix(n, n)};
    const double denom = 2.0 * static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j) out.p(i, j) = (cond(i, j) + cond(j, i)) / denom;
        }
    }
    return out;
}

inline AffinityMatrix conditional_affinities(const Matrix& x, double perplexity, unsigned threads = 1) {
    return symmetrize(conditional_gaussian(x, perplexity, nullptr, threads));
}

/// Normalised Student-t similarities of an embedding, zero diagonal.
inline Matrix student_t_similarities(const Matrix& y) {
    const std::size_t n = y.rows();
    Matrix q(n, n);
    double z = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            q(i, j) = 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
            z += q(i, j);
        }
    }
    for (double& v : q.data()) v /= z;
    return q;
}

/// KL(P || Q) over off-diagonal entries, natural log, 0 ln 0 = 0.
inline double kl_divergence(const Matrix& p, const Matrix& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols()) fail(ErrorKind::dimension, "KL: shape mismatch");
    double kl = 0.0;
    for (std::size_t i = 0; i < p.rows(); ++i) {
        for (std::size_t j = 0; j < p.cols(); ++j) {
            if (i == j && p.rows() == p.cols()) continue;
            const double pij = p(i, j);
            if (pij <= 0.0) continue;
            const double qij = q(i, j);
            if (qij <= 0.0) {
                fail(ErrorKind::numeric, "KL undefined: Q is zero where P is positive", {{"i", i}, {"j", j}});
            }
            kl += pij * std::log(pij / qij);
        }
    }
    return kl;
}

inline double tsne_cost(const AffinityMatrix& p, const Matrix& y) {
    return kl_divergence(p.p, student_t_similarities(y));
}

/// dKL/dy_i = 4 sum_j (e*P_ij - Q_ij) (1 + |y_i - y_j|^2)^-1 (y_i - y_j).
/// Each row is reduced in index order, so the result is independent of `threads`.
inline Matrix tsne_gradient(const AffinityMatrix& p, const Matrix& y, double exaggeration = 1.0, unsigned threads = 1) {
    const std::size_t n = y.rows();
    const std::size_t dims = y.cols();
    Matrix num(n, n);
    std::vector<double> row_sums(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = 1.0 / (1.0 + squared_distance(y.row(i), y.row(j)));
            num(i, j) = w;
            s += w;
        }
        row_sums[i] = s;
    });
    double z = 0.0;
    for (double s : row_sums) z += s;

    Matrix grad(n, dims);
    parallel_for(n, threads, [&](std::size_t i) {
        auto g = grad.row(i);
        auto yi = y.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double w = num(i, j);
            const double mult = (exaggeration * p.p(i, j) - w / z) * w;
            auto yj = y.row(j);
            for (std::size_t k = 0; k < dims; ++k) g[k] += 4.0 * mult * (yi[k] - yj[k]);
        }
    });
    return grad;
}

using TsneObserver = std::function<void(int iteration, const Matrix& y)>;

inline void validate(const TsneConfig& c, std::size_t n) {
    if (n < 3) fail(ErrorKind::config, "t-SNE needs at least 3 points", {{"n", n}});
    if (!(c.perplexity > 0.0) || c.perplexity >= static_cast<double>(n)) {
        fail(ErrorKind::config, "perplexity must be positive and below n", {{"perplexity", c.perplexity}, {"n", n}});
    }
    if (c.iterations < 1 || c.output_dims < 1) fail(ErrorKind::config, "iterations and output_dims must be >= 1");
    if (!(c.learning_rate > 0.0) || !(c.early_exaggeration > 0.0) || !(c.initial_momentum > 0.0) ||
        !(c.final_momentum > 0.0) || !(c.min_gain > 0.0)) {
        fail(ErrorKind::config, "t-SNE rates must be positive");
    }
}

/// Exact t-SNE. `observer`, when set, sees the iterate after every step
/// (iteration numbers start at 1).
inline Matrix tsne_embed(const Matrix& x, const TsneConfig& config, const TsneObserver& observer = {}) {
    const std::size_t n = x.rows();
    validate(config, n);
    if (!x.all_finite()) fail(ErrorKind::numeric, "t-SNE: non-finite input");
    const auto dims = static_cast<std::size_t>(config.output_dims);
    const AffinityMatrix p = conditional_affinities(x, config.perplexity, config.threads);

    Rng rng(config.seed);
    Matrix y(n, dims);
    for (double& v : y.data()) v = 1e-4 * rng.normal();

    Matrix update(n, dims);
    Matrix gains(n, dims, 1.0);
    const int switch_iter = std::min(config.momentum_switch_iter, config.iterations);
    for (int iter = 0; iter < config.iterations; ++iter) {
        const double exaggeration = iter < config.exaggeration_iters ? config.early_exaggeration : 1.0;
        const double momentum = iter < switch_iter ? config.initial_momentum : config.final_momentum;
        const Matrix grad = tsne_gradient(p, y, exaggeration, config.threads);

        auto g = grad.data();
        auto u = update.data();
        auto gn = gains.data();
        auto yv = y.data();
        for (std::size_t k = 0; k < yv.size(); ++k) {
            const bool same_sign = (g[k] > 0.0) - (g[k] < 0.0) == (u[k] > 0.0) - (u[k] < 0.0);
            gn[k] = same_sign ? gn[k] * 0.8 : gn[k] + 0.2;
            gn[k] = std::max(gn[k], config.min_gain);
            u[k] = momentum * u[k] - config.learning_rate * gn[k] * g[k];
            yv[k] += u[k];
        }
        for (std::size_t k = 0; k < dims; ++k) {
            double mean = 0.0;
            for (std::size_t i = 0; i < n; ++i) mean += y(i, k);
            mean /= static_cast<double>(n);
            for (std::size_t i = 0; i < n; ++i) y(i, k) -= mean;
        }
        if (!y.all_finite()) {
            fail(ErrorKind::numeric, "t-SNE diverged at iteration " + std::to_string(iter + 1), {{"iteration", iter + 1}});
        }
        if (observer) observer(iter + 1, y);
    }
    return y;
}

} // namespace trajal
