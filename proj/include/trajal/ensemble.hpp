#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "trajal/error.hpp"
#include "trajal/matrix.hpp"
#include "trajal/parallel.hpp"
#include "trajal/rng.hpp"
#include "trajal/tree.hpp"

namespace trajal {

enum class ModelKind { forest, extra_trees, gradient_boosting };

inline constexpr std::string_view to_string(ModelKind k) noexcept {
    switch (k) {
    case ModelKind::forest: return "forest";
    case ModelKind::extra_trees: return "extra_trees";
    case ModelKind::gradient_boosting: return "gradient_boosting";
    }
    return "forest";
}

inline ModelKind parse_model_kind(std::string_view s) {
    if (s == "forest" || s == "random_forest") return ModelKind::forest;
    if (s == "extra_trees") return ModelKind::extra_trees;
    if (s == "gradient_boosting") return ModelKind::gradient_boosting;
    fail(ErrorKind::config, "unknown classifier \"" + std::string(s) + "\"", {{"classifier", s}});
}

/// Display names in the fixed surface order.
inline constexpr std::string_view display_name(ModelKind k) noexcept {
    switch (k) {
    case ModelKind::forest: return "Random Forest";
    case ModelKind::extra_trees: return "Extra Trees";
    case ModelKind::gradient_boosting: return "Gradient Boosting";
    }
    return "";
}

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;            // unlimited
    std::size_t max_features = 0; // 0: ceil(sqrt(d))
    std::optional<bool> bootstrap; // default: forest yes, extra_trees no
    unsigned threads = 1;
};

struct GBConfig {
    int n_estimators = 10;
    double learning_rate = 0.3;
    int max_depth = 1;
    std::uint64_t seed = 34;
};

/// Fitted tree ensemble. For boosting, `trees` holds one tree per iteration
/// and fitted class (iteration-major) and `class_map` lists the class codes
/// seen in training; predictions are expanded back to all `n_classes`.
struct EnsembleModel {
    ModelKind kind = ModelKind::forest;
    std::size_t n_features = 0;
    std::size_t n_classes = 0;
    bool degenerate = false;
    int degenerate_class = 0;
    std::vector<DecisionTree> trees;
    std::vector<int> class_map;
    std::vector<double> initial_scores;
    double learning_rate = 0.0;
    std::vector<double> train_deviance; // boosting: mean log-loss before/after each iteration
    nlohmann::json hyperparams = nlohmann::json::object();

    Matrix predict_proba(const Matrix& x) const;
    std::vector<int> predict(const Matrix& x) const;
};

namespace detail {

inline std::size_t infer_classes(std::span<const int> y, std::size_t n_classes) {
    int top = -1;
    for (int v : y) {
        if (v < 0) fail(ErrorKind::config, "class codes must be non-negative");
        top = std::max(top, v);
    }
    const auto needed = static_cast<std::size_t>(top + 1);
    if (n_classes == 0) return needed;
    if (needed > n_classes) fail(ErrorKind::config, "class code exceeds declared class count");
    return n_classes;
}

inline std::vector<int> present_classes(std::span<const int> y) {
    std::set<int> s(y.begin(), y.end());
    return {s.begin(), s.end()};
}

inline void check_xy(const Matrix& x, std::span<const int> y) {
    if (x.rows() != y.size()) fail(ErrorKind::dimension, "X and y lengths differ", {{"rows", x.rows()}, {"labels", y.size()}});
    if (x.rows() == 0) fail(ErrorKind::dimension, "cannot fit on zero rows");
    if (!x.all_finite()) fail(ErrorKind::numeric, "non-finite training features");
}

inline EnsembleModel degenerate_model(ModelKind kind, std::size_t d, std::size_t k, int cls) {
    EnsembleModel m;
    m.kind = kind;
    m.n_features = d;
    m.n_classes = k;
    m.degenerate = true;
    m.degenerate_class = cls;
    return m;
}

inline double sigmoid(double v) noexcept {
    return v >= 0.0 ? 1.0 / (1.0 + std::exp(-v)) : std::exp(v) / (1.0 + std::exp(v));
}

// Probabilities over the fitted (compact) classes from raw scores.
inline void scores_to_proba(std::span<const double> scores, std::span<double> out) {
    if (scores.size() == 1) {
        const double p = sigmoid(scores[0]);
        out[0] = 1.0 - p;
        out[1] = p;
        return;
    }
    const double top = *std::max_element(scores.begin(), scores.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < scores.size(); ++k) {
        out[k] = std::exp(scores[k] - top);
        sum += out[k];
    }
    for (std::size_t k = 0; k < scores.size(); ++k) out[k] /= sum;
}

} // namespace detail

/// Random forest (bootstrap + best midpoint splits) or extra-trees (all rows,
/// uniformly random thresholds). Tree t draws from stream (seed, t), so the
/// result does not depend on `params.threads`.
inline EnsembleModel fit_forest(const Matrix& x, std::span<const int> y, ModelKind kind, std::uint64_t seed,
                                const ForestParams& params = {}, std::size_t n_classes = 0) {
    if (kind == ModelKind::gradient_boosting) fail(ErrorKind::config, "fit_forest: use fit_gradient_boosting");
    detail::check_xy(x, y);
    const std::size_t k = detail::infer_classes(y, n_classes);
    const std::size_t d = x.cols();
    const auto present = detail::present_classes(y);
    if (present.size() < 2) return detail::degenerate_model(kind, d, k, present.front());
    if (params.n_trees < 1) fail(ErrorKind::config, "n_trees must be >= 1");

    TreeParams tp;
    tp.max_depth = params.max_depth;
    tp.max_features = params.max_features != 0
                          ? params.max_features
                          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(d))));
    tp.random_thresholds = kind == ModelKind::extra_trees;
    const bool bootstrap = params.bootstrap.value_or(kind == ModelKind::forest);

    EnsembleModel model;
    model.kind = kind;
    model.n_features = d;
    model.n_classes = k;
    model.trees.resize(static_cast<std::size_t>(params.n_trees));
    const std::size_t n = x.rows();
    parallel_for(model.trees.size(), params.threads, [&](std::size_t t) {
        Rng rng = Rng::stream(seed, t);
        std::vector<std::size_t> rows(n);
        for (std::size_t i = 0; i < n; ++i) rows[i] = bootstrap ? static_cast<std::size_t>(rng.below(n)) : i;
        model.trees[t] = fit_classification_tree(x, y, k, std::move(rows), tp, rng);
    });
    model.hyperparams = {{"n_trees", params.n_trees},      {"max_depth", params.max_depth},
                         {"max_features", tp.max_features}, {"bootstrap", bootstrap},
                         {"criterion", "gini"},             {"seed", seed}};
    return model;
}

/// Stage-wise boosting of least-squares regression trees on the log-loss
/// gradient with Newton leaf values. Two classes: one tree per iteration on
/// log-odds. More: one tree per class per iteration on softmax scores.
inline EnsembleModel fit_gradient_boosting(const Matrix& x, std::span<const int> y, const GBConfig& config,
                                           std::size_t n_classes = 0) {
    if (config.n_estimators < 1) fail(ErrorKind::config, "n_estimators must be >= 1", {{"n_estimators", config.n_estimators}});
    if (!(config.learning_rate > 0.0)) fail(ErrorKind::config, "learning_rate must be positive");
    if (config.max_depth < 1) fail(ErrorKind::config, "max_depth must be >= 1");
    detail::check_xy(x, y);
    const std::size_t k_all = detail::infer_classes(y, n_classes);
    const std::size_t d = x.cols();
    const auto present = detail::present_classes(y);
    if (present.size() < 2) return detail::degenerate_model(ModelKind::gradient_boosting, d, k_all, present.front());

    const std::size_t n = x.rows();
    const std::size_t k = present.size();
    const std::size_t heads = k == 2 ? 1 : k;
    std::vector<std::size_t> compact(n);
    for (std::size_t i = 0; i < n; ++i) {
        compact[i] = static_cast<std::size_t>(std::lower_bound(present.begin(), present.end(), y[i]) - present.begin());
    }

    EnsembleModel model;
    model.kind = ModelKind::gradient_boosting;
    model.n_features = d;
    model.n_classes = k_all;
    model.class_map = present;
    model.learning_rate = config.learning_rate;

    std::vector<double> prior(k, 0.0);
    for (auto c : compact) prior[c] += 1.0;
    for (double& p : prior) p /= static_cast<double>(n);
    if (heads == 1) {
        model.initial_scores = {std::log(prior[1] / prior[0])};
    } else {
        for (double p : prior) model.initial_scores.push_back(std::log(p));
    }

    Matrix scores(n, heads);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t h = 0; h < heads; ++h) scores(i, h) = model.initial_scores[h];

    Matrix proba(n, k);
    auto refresh = [&] {
        double loss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            detail::scores_to_proba(scores.row(i), proba.row(i));
            loss -= std::log(std::max(proba(i, compact[i]), 1e-300));
        }
        return loss / static_cast<double>(n);
    };
    model.train_deviance.push_back(refresh());

    const double newton_scale = heads == 1 ? 1.0 : static_cast<double>(k - 1) / static_cast<double>(k);
    std::vector<double> residual(n);
    for (int it = 0; it < config.n_estimators; ++it) {
        const Matrix start = proba;
        for (std::size_t h = 0; h < heads; ++h) {
            const std::size_t cls = heads == 1 ? 1 : h;
            for (std::size_t i = 0; i < n; ++i) residual[i] = (compact[i] == cls ? 1.0 : 0.0) - start(i, cls);
            auto leaf = [&](std::span<const std::size_t> rows) {
                double num = 0.0;
                double den = 0.0;
                for (auto r : rows) {
                    const double p = start(r, cls);
                    num += residual[r];
                    den += p * (1.0 - p);
                }
                return std::abs(den) < 1e-150 ? 0.0 : newton_scale * num / den;
            };
            DecisionTree tree = fit_regression_tree(x, residual, config.max_depth, leaf);
            for (std::size_t i = 0; i < n; ++i) scores(i, h) += config.learning_rate * tree.leaf_value(x.row(i))[0];
            model.trees.push_back(std::move(tree));
        }
        model.train_deviance.push_back(refresh());
    }
    model.hyperparams = {{"n_estimators", config.n_estimators},
                         {"learning_rate", config.learning_rate},
                         {"max_depth", config.max_depth},
                         {"seed", config.seed},
                         {"loss", heads == 1 ? "binomial_deviance" : "multinomial_deviance"}};
    return model;
}

inline Matrix EnsembleModel::predict_proba(const Matrix& x) const {
    if (x.cols() != n_features) {
        fail(ErrorKind::dimension, "model expects " + std::to_string(n_features) + " features, got " + std::to_string(x.cols()),
             {{"expected", n_features}, {"got", x.cols()}});
    }
    Matrix out(x.rows(), n_classes);
    if (degenerate) {
        for (std::size_t i = 0; i < x.rows(); ++i) out(i, static_cast<std::size_t>(degenerate_class)) = 1.0;
        return out;
    }
    if (kind != ModelKind::gradient_boosting) {
        const double inv = 1.0 / static_cast<double>(trees.size());
        for (std::size_t i = 0; i < x.rows(); ++i) {
            auto row = out.row(i);
            for (const auto& t : trees) {
                const auto& dist = t.leaf_value(x.row(i));
                for (std::size_t c = 0; c < n_classes; ++c) row[c] += dist[c];
            }
            for (double& v : row) v *= inv;
        }
        return out;
    }
    const std::size_t heads = initial_scores.size();
    const std::size_t k = class_map.size();
    std::vector<double> s(heads);
    std::vector<double> p(k);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        s = initial_scores;
        for (std::size_t t = 0; t < trees.size(); ++t) s[t % heads] += learning_rate * trees[t].leaf_value(x.row(i))[0];
        detail::scores_to_proba(s, p);
        for (std::size_t c = 0; c < k; ++c) out(i, static_cast<std::size_t>(class_map[c])) = p[c];
    }
    return out;
}

/// Row-wise argmax; the lowest class code wins ties.
inline std::vector<int> argmax_rows(const Matrix& proba) {
    std::vector<int> out(proba.rows());
    for (std::size_t i = 0; i < proba.rows(); ++i) {
        auto row = proba.row(i);
        out[i] = static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
    }
    return out;
}

inline std::vector<int> EnsembleModel::predict(const Matrix& x) const { return argmax_rows(predict_proba(x)); }

inline EnsembleModel fit_model(ModelKind kind, const Matrix& x, std::span<const int> y, std::uint64_t seed,
                               std::size_t n_classes = 0, unsigned threads = 1) {
    if (kind == ModelKind::gradient_boosting) {
        GBConfig cfg;
        cfg.seed = seed;
        return fit_gradient_boosting(x, y, cfg, n_classes);
    }
    ForestParams fp;
    fp.threads = threads;
    return fit_forest(x, y, kind, seed, fp, n_classes);
}

// ---------------------------------------------------------------------------
// Versioned JSON document

inline constexpr int model_format_version = 1;

inline nlohmann::json to_json(const DecisionTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& n : tree.nodes) nodes.push_back({n.feature, n.threshold, n.left, n.right, n.value});
    return {{"max_depth", tree.max_depth}, {"nodes", std::move(nodes)}};
}

inline DecisionTree tree_from_json(const nlohmann::json& j) {
    DecisionTree t;
    t.max_depth = j.at("max_depth").get<int>();
    for (const auto& n : j.at("nodes")) {
        t.nodes.push_back({n.at(0).get<int>(), n.at(1).get<double>(), n.at(2).get<int>(), n.at(3).get<int>(),
                           n.at(4).get<std::vector<double>>()});
    }
    return t;
}

inline nlohmann::json to_json(const EnsembleModel& m) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m.trees) trees.push_back(to_json(t));
    return {{"format", "trajal.ensemble"},
            {"version", model_format_version},
            {"kind", to_string(m.kind)},
            {"n_features", m.n_features},
            {"n_classes", m.n_classes},
            {"degenerate", m.degenerate},
            {"degenerate_class", m.degenerate_class},
            {"class_map", m.class_map},
            {"initial_scores", m.initial_scores},
            {"learning_rate", m.learning_rate},
            {"train_deviance", m.train_deviance},
            {"hyperparams", m.hyperparams},
            {"trees", std::move(trees)}};
}

inline EnsembleModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "trajal.ensemble") fail(ErrorKind::schema, "not an ensemble document");
        if (j.at("version").get<int>() != model_format_version) {
            fail(ErrorKind::schema, "unsupported ensemble document version", {{"version", j.at("version")}});
        }
        EnsembleModel m;
        m.kind = parse_model_kind(j.at("kind").get<std::string>());
        m.n_features = j.at("n_features").get<std::size_t>();
        m.n_classes = j.at("n_classes").get<std::size_t>();
        m.degenerate = j.at("degenerate").get<bool>();
        m.degenerate_class = j.at("degenerate_class").get<int>();
        m.class_map = j.at("class_map").get<std::vector<int>>();
        m.initial_scores = j.at("initial_scores").get<std::vector<double>>();
        m.learning_rate = j.at("learning_rate").get<double>();
        m.train_deviance = j.at("train_deviance").get<std::vector<double>>();
        m.hyperparams = j.at("hyperparams");
        for (const auto& t : j.at("trees")) m.trees.push_back(tree_from_json(t));
        return m;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::schema, std::string("malformed ensemble document: ") + e.what());
    }
}

} // namespace trajal
