#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "trajal/error.hpp"
#include "trajal/matrix.hpp"
#include "trajal/rng.hpp"

namespace trajal {

/// Support-weighted mean of per-class F1. Classes that only appear in
/// y_pred have zero support and contribute nothing; P + R = 0 gives F1 = 0.
inline double weighted_f1(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size()) {
        fail(ErrorKind::dimension, "weighted_f1: length mismatch", {{"y_true", y_true.size()}, {"y_pred", y_pred.size()}});
    }
    if (y_true.empty()) fail(ErrorKind::dimension, "weighted_f1: empty input");

    struct Tally {
        double tp = 0, fp = 0, fn = 0, support = 0;
    };
    std::map<int, Tally> classes;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        classes[y_true[i]].support += 1;
        if (y_true[i] == y_pred[i]) {
            classes[y_true[i]].tp += 1;
        } else {
            classes[y_true[i]].fn += 1;
            classes[y_pred[i]].fp += 1;
        }
    }
    double score = 0.0;
    for (const auto& [cls, t] : classes) {
        if (t.support == 0) continue;
        const double precision = t.tp + t.fp > 0 ? t.tp / (t.tp + t.fp) : 0.0;
        const double recall = t.tp / t.support;
        const double f1 = precision + recall > 0 ? 2.0 * precision * recall / (precision + recall) : 0.0;
        score += t.support * f1;
    }
    return score / static_cast<double>(y_true.size());
}

inline double accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
    if (y_true.size() != y_pred.size() || y_true.empty()) fail(ErrorKind::dimension, "accuracy: bad lengths");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < y_true.size(); ++i) hits += y_true[i] == y_pred[i];
    return static_cast<double>(hits) / static_cast<double>(y_true.size());
}

struct SplitConfig {
    double test_fraction = 0.2;
    std::uint64_t seed = 34;
};

struct TrainTestSplit {
    Matrix x_train;
    std::vector<int> y_train;
    Matrix x_test;
    std::vector<int> y_test;
    std::vector<std::size_t> train_index;
    std::vector<std::size_t> test_index;
};

/// Seeded shuffle; the first ceil(n * (1 - test_fraction)) rows train.
inline TrainTestSplit split_train_test(const Matrix& x, std::span<const int> y, const SplitConfig& config = {}) {
    const std::size_t n = x.rows();
    if (y.size() != n) fail(ErrorKind::dimension, "split: X and y lengths differ");
    if (n < 5) fail(ErrorKind::degenerate, "split needs at least 5 rows", {{"n", n}});
    if (!(config.test_fraction > 0.0 && config.test_fraction < 1.0)) {
        fail(ErrorKind::config, "test_fraction must lie in (0, 1)");
    }
    auto n_train = static_cast<std::size_t>(std::ceil(static_cast<double>(n) * (1.0 - config.test_fraction) - 1e-9));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    Rng rng(config.seed);
    const auto perm = rng.permutation(n);
    TrainTestSplit out;
    out.train_index.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
    out.test_index.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
    out.x_train = x.select_rows(out.train_index);
    out.x_test = x.select_rows(out.test_index);
    for (auto i : out.train_index) out.y_train.push_back(y[i]);
    for (auto i : out.test_index) out.y_test.push_back(y[i]);
    return out;
}

} // namespace trajal
