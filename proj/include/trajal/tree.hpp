#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "trajal/error.hpp"
#include "trajal/matrix.hpp"
#include "trajal/rng.hpp"

namespace trajal {

/// Internal nodes route x[feature] <= threshold to `left`. Leaves have
/// feature == -1 and carry `value`: a class distribution for classification
/// trees, a single score for regression trees.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    std::vector<double> value;

    bool is_leaf() const noexcept { return feature < 0; }
    friend bool operator==(const TreeNode&, const TreeNode&) = default;
};

struct DecisionTree {
    std::vector<TreeNode> nodes; // nodes[0] is the root
    int max_depth = 0;           // 0: unlimited

    const std::vector<double>& leaf_value(std::span<const double> x) const {
        std::size_t at = 0;
        while (!nodes[at].is_leaf()) {
            const auto& n = nodes[at];
            at = static_cast<std::size_t>(x[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
        }
        return nodes[at].value;
    }

    int depth() const {
        std::function<int(std::size_t)> walk = [&](std::size_t i) -> int {
            if (nodes[i].is_leaf()) return 0;
            return 1 + std::max(walk(static_cast<std::size_t>(nodes[i].left)), walk(static_cast<std::size_t>(nodes[i].right)));
        };
        return nodes.empty() ? 0 : walk(0);
    }

    friend bool operator==(const DecisionTree&, const DecisionTree&) = default;
};

struct TreeParams {
    int max_depth = 0;            // 0: grow until pure
    std::size_t max_features = 0; // 0: all features
    bool random_thresholds = false;
    std::size_t min_samples_split = 2;
};

namespace detail {

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double score = -1.0; // larger is better; criterion-specific
};

// Candidate thresholds are midpoints of consecutive distinct sorted values.
inline double midpoint(double a, double b) noexcept {
    const double m = a + (b - a) / 2.0;
    return (m >= b) ? a : m;
}

inline bool better(const SplitChoice& cand, const SplitChoice& best) noexcept {
    if (best.feature < 0) return true;
    if (cand.score > best.score) return true;
    if (cand.score < best.score) return false;
    if (cand.feature != best.feature) return cand.feature < best.feature;
    return cand.threshold < best.threshold;
}

class ClassificationBuilder {
public:
    ClassificationBuilder(const Matrix& x, std::span<const int> y, std::size_t n_classes, const TreeParams& params,
                          Rng& rng)
        : x_(x), y_(y), k_(n_classes), params_(params), rng_(rng) {}

    DecisionTree build(std::vector<std::size_t> samples) {
        DecisionTree tree;
        tree.max_depth = params_.max_depth;
        tree_ = &tree;
        grow(samples, 0);
        return tree;
    }

private:
    std::vector<double> counts(std::span<const std::size_t> idx) const {
        std::vector<double> c(k_, 0.0);
        for (auto i : idx) c[static_cast<std::size_t>(y_[i])] += 1.0;
        return c;
    }

    // Sum_c count_c^2 / n, the quantity Gini minimisation maximises per child.
    static double purity(const std::vector<double>& c, double n) noexcept {
        double s = 0.0;
        for (double v : c) s += v * v;
        return s / n;
    }

    int grow(std::vector<std::size_t>& idx, int depth) {
        const int id = static_cast<int>(tree_->nodes.size());
        tree_->nodes.emplace_back();
        std::vector<double> c = counts(idx);
        const double n = static_cast<double>(idx.size());
        const bool pure = std::count_if(c.begin(), c.end(), [](double v) { return v > 0.0; }) <= 1;
        const bool depth_capped = params_.max_depth > 0 && depth >= params_.max_depth;

        std::optional<SplitChoice> split;
        if (!pure && !depth_capped && idx.size() >= params_.min_samples_split) split = find_split(idx, c);
        if (!split) {
            for (double& v : c) v /= n;
            tree_->nodes[static_cast<std::size_t>(id)].value = std::move(c);
            return id;
        }

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        for (auto i : idx) {
            (x_(i, static_cast<std::size_t>(split->feature)) <= split->threshold ? left : right).push_back(i);
        }
        idx.clear();
        idx.shrink_to_fit();
        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        auto& node = tree_->nodes[static_cast<std::size_t>(id)];
        node.feature = split->feature;
        node.threshold = split->threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    std::optional<SplitChoice> find_split(const std::vector<std::size_t>& idx, const std::vector<double>& total) {
        const std::size_t d = x_.cols();
        const std::size_t wanted = params_.max_features == 0 ? d : std::min(params_.max_features, d);

        // Features are drawn without replacement; constant ones do not count
        // towards the quota and the draw continues past them.
        std::vector<std::size_t> order(d);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::optional<SplitChoice> best;
        std::size_t evaluated = 0;
        for (std::size_t drawn = 0; drawn < d && evaluated < wanted; ++drawn) {
            const std::size_t pick = drawn + static_cast<std::size_t>(rng_.below(d - drawn));
            std::swap(order[drawn], order[pick]);
            const std::size_t f = order[drawn];
            auto cand = params_.random_thresholds ? random_split(idx, total, f) : best_split(idx, total, f);
            if (!cand) continue;
            ++evaluated;
            if (!best || better(*cand, *best)) best = cand;
        }
        return best;
    }

    std::optional<SplitChoice> best_split(const std::vector<std::size_t>& idx, const std::vector<double>& total,
                                          std::size_t f) const {
        std::vector<std::size_t> sorted = idx;
        std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) { return x_(a, f) < x_(b, f); });
        if (x_(sorted.front(), f) >= x_(sorted.back(), f)) return std::nullopt;

        std::vector<double> left(k_, 0.0);
        std::vector<double> right = total;
        const double n = static_cast<double>(sorted.size());
        std::optional<SplitChoice> best;
        for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
            const auto cls = static_cast<std::size_t>(y_[sorted[k]]);
            left[cls] += 1.0;
            right[cls] -= 1.0;
            const double a = x_(sorted[k], f);
            const double b = x_(sorted[k + 1], f);
            if (!(a < b)) continue;
            const double nl = static_cast<double>(k + 1);
            SplitChoice cand{static_cast<int>(f), midpoint(a, b), purity(left, nl) + purity(right, n - nl)};
            if (!best || cand.score > best->score) best = cand;
        }
        return best;
    }

    std::optional<SplitChoice> random_split(const std::vector<std::size_t>& idx, const std::vector<double>& total,
                                            std::size_t f) {
        double lo = x_(idx.front(), f);
        double hi = lo;
        for (auto i : idx) {
            lo = std::min(lo, x_(i, f));
            hi = std::max(hi, x_(i, f));
        }
        if (!(lo < hi)) return std::nullopt;
        double threshold = rng_.uniform(lo, hi);
        if (threshold >= hi) threshold = lo;

        std::vector<double> left(k_, 0.0);
        double nl = 0.0;
        for (auto i : idx) {
            if (x_(i, f) <= threshold) {
                left[static_cast<std::size_t>(y_[i])] += 1.0;
                nl += 1.0;
            }
        }
        std::vector<double> right(k_);
        for (std::size_t c = 0; c < k_; ++c) right[c] = total[c] - left[c];
        const double n = static_cast<double>(idx.size());
        return SplitChoice{static_cast<int>(f), threshold, purity(left, nl) + purity(right, n - nl)};
    }

    const Matrix& x_;
    std::span<const int> y_;
    std::size_t k_;
    TreeParams params_;
    Rng& rng_;
    DecisionTree* tree_ = nullptr;
};

} // namespace detail

/// CART classification tree with Gini impurity. `samples` may repeat rows
/// (bootstrap draws count with multiplicity).
inline DecisionTree fit_classification_tree(const Matrix& x, std::span<const int> y, std::size_t n_classes,
                                            std::vector<std::size_t> samples, const TreeParams& params, Rng& rng) {
    if (samples.empty()) fail(ErrorKind::dimension, "tree: no samples");
    detail::ClassificationBuilder builder(x, y, n_classes, params, rng);
    return builder.build(std::move(samples));
}

/// Least-squares regression tree over all features. Leaf values come from
/// `leaf_value(rows in leaf)` so boosting can plug in its Newton step.
inline DecisionTree fit_regression_tree(const Matrix& x, std::span<const double> target, int max_depth,
                                        const std::function<double(std::span<const std::size_t>)>& leaf_value) {
    DecisionTree tree;
    tree.max_depth = max_depth;
    std::vector<std::size_t> all(x.rows());
    std::iota(all.begin(), all.end(), std::size_t{0});

    std::function<int(std::vector<std::size_t>&, int)> grow = [&](std::vector<std::size_t>& idx, int depth) -> int {
        const int id = static_cast<int>(tree.nodes.size());
        tree.nodes.emplace_back();
        std::optional<detail::SplitChoice> best;
        if ((max_depth <= 0 || depth < max_depth) && idx.size() >= 2) {
            double total = 0.0;
            for (auto i : idx) total += target[i];
            for (std::size_t f = 0; f < x.cols(); ++f) {
                std::vector<std::size_t> sorted = idx;
                std::stable_sort(sorted.begin(), sorted.end(),
                                 [&](std::size_t a, std::size_t b) { return x(a, f) < x(b, f); });
                double left = 0.0;
                const double n = static_cast<double>(sorted.size());
                for (std::size_t k = 0; k + 1 < sorted.size(); ++k) {
                    left += target[sorted[k]];
                    const double a = x(sorted[k], f);
                    const double b = x(sorted[k + 1], f);
                    if (!(a < b)) continue;
                    const double nl = static_cast<double>(k + 1);
                    const double right = total - left;
                    detail::SplitChoice cand{static_cast<int>(f), detail::midpoint(a, b),
                                             left * left / nl + right * right / (n - nl)};
                    if (!best || detail::better(cand, *best)) best = cand;
                }
            }
        }
        if (!best) {
            tree.nodes[static_cast<std::size_t>(id)].value = {leaf_value(idx)};
            return id;
        }
        std::vector<std::size_t> l;
        std::vector<std::size_t> r;
        for (auto i : idx) (x(i, static_cast<std::size_t>(best->feature)) <= best->threshold ? l : r).push_back(i);
        const int li = grow(l, depth + 1);
        const int ri = grow(r, depth + 1);
        auto& node = tree.nodes[static_cast<std::size_t>(id)];
        node.feature = best->feature;
        node.threshold = best->threshold;
        node.left = li;
        node.right = ri;
        return id;
    };
    grow(all, 0);
    return tree;
}

} // namespace trajal
