#include <gtest/gtest.h>

#include <cmath>

#include "test_support.hpp"
#include "trajal/ensemble.hpp"
#include "trajal/metrics.hpp"

using namespace trajal;

namespace {

support::Blobs corner_clusters(std::uint64_t seed) {
    return support::make_blobs(20, {{0.0, 0.0}, {10.0, 10.0}}, 1.0, seed);
}

// Nearest-centroid classifier: a separate route confirming the fixture is separable.
std::vector<int> nearest_centroid(const Matrix& x, const std::vector<int>& y) {
    double c[2][2] = {{0, 0}, {0, 0}};
    double n[2] = {0, 0};
    for (std::size_t i = 0; i < x.rows(); ++i) {
        c[y[i]][0] += x(i, 0);
        c[y[i]][1] += x(i, 1);
        n[y[i]] += 1;
    }
    std::vector<int> out;
    for (std::size_t i = 0; i < x.rows(); ++i) {
        double best = 1e300;
        int arg = 0;
        for (int k = 0; k < 2; ++k) {
            const double dx = x(i, 0) - c[k][0] / n[k];
            const double dy = x(i, 1) - c[k][1] / n[k];
            if (dx * dx + dy * dy < best) {
                best = dx * dx + dy * dy;
                arg = k;
            }
        }
        out.push_back(arg);
    }
    return out;
}

// Boosting re-traced by exhaustive enumeration of every 1-D stump per round.
std::vector<double> boosting_oracle_scores(const std::vector<double>& xs, const std::vector<int>& y, int rounds, double lr,
                                           const std::vector<double>& query) {
    const std::size_t n = xs.size();
    double pos = 0;
    for (int v : y) pos += v;
    const double f0 = std::log(pos / (static_cast<double>(n) - pos));
    std::vector<double> f(n, f0);
    struct Stump {
        double thr, left, right;
    };
    std::vector<Stump> stumps;
    for (int r = 0; r < rounds; ++r) {
        std::vector<double> p(n), res(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = 1.0 / (1.0 + std::exp(-f[i]));
            res[i] = y[i] - p[i];
        }
        std::vector<double> sorted = xs;
        std::sort(sorted.begin(), sorted.end());
        double best_sse = 1e300, best_thr = 0;
        for (std::size_t k = 0; k + 1 < n; ++k) {
            if (sorted[k] == sorted[k + 1]) continue;
            const double thr = (sorted[k] + sorted[k + 1]) / 2;
            double sl = 0, sr = 0, nl = 0, nr = 0;
            for (std::size_t i = 0; i < n; ++i) (xs[i] <= thr ? (sl += res[i], nl += 1) : (sr += res[i], nr += 1));
            double sse = 0;
            for (std::size_t i = 0; i < n; ++i) {
                const double m = xs[i] <= thr ? sl / nl : sr / nr;
                sse += (res[i] - m) * (res[i] - m);
            }
            if (sse < best_sse - 1e-15) {
                best_sse = sse;
                best_thr = thr;
            }
        }
        double nl = 0, dl = 0, nr = 0, dr = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (xs[i] <= best_thr) {
                nl += res[i];
                dl += p[i] * (1 - p[i]);
            } else {
                nr += res[i];
                dr += p[i] * (1 - p[i]);
            }
        }
        stumps.push_back({best_thr, nl / dl, nr / dr});
        for (std::size_t i = 0; i < n; ++i) f[i] += lr * (xs[i] <= best_thr ? nl / dl : nr / dr);
    }
    std::vector<double> out;
    for (double q : query) {
        double s = f0;
        for (const auto& st : stumps) s += lr * (q <= st.thr ? st.left : st.right);
        out.push_back(1.0 / (1.0 + std::exp(-s)));
    }
    return out;
}

} // namespace

TEST(Forest, SeparatedClustersFitPerfectly) {
    const auto b = corner_clusters(1);
    ASSERT_EQ(accuracy(b.y, nearest_centroid(b.x, b.y)), 1.0);
    for (auto kind : {ModelKind::forest, ModelKind::extra_trees}) {
        const auto model = fit_forest(b.x, b.y, kind, 34);
        EXPECT_EQ(model.trees.size(), 100u);
        EXPECT_FALSE(model.degenerate);
        EXPECT_EQ(accuracy(b.y, model.predict(b.x)), 1.0) << to_string(kind);
        const Matrix proba = model.predict_proba(b.x);
        for (std::size_t i = 0; i < proba.rows(); ++i) EXPECT_NEAR(proba(i, 0) + proba(i, 1), 1.0, 1e-9);
    }
}

TEST(Forest, HeldOutConfidence) {
    const auto b = support::make_blobs(60, {{0.0, 0.0}, {10.0, 10.0}}, 1.0, 4);
    const auto split = split_train_test(b.x, b.y);
    const auto model = fit_forest(split.x_train, split.y_train, ModelKind::forest, 34);
    const Matrix proba = model.predict_proba(split.x_test);
    for (std::size_t i = 0; i < proba.rows(); ++i) EXPECT_GE(std::max(proba(i, 0), proba(i, 1)), 0.9);
}

TEST(Forest, SingleClassIsDegenerate) {
    const Matrix x{{0.0}, {1.0}, {2.0}};
    const std::vector<int> y{0, 0, 0};
    for (auto kind : {ModelKind::forest, ModelKind::extra_trees}) {
        const auto m = fit_forest(x, y, kind, 1);
        EXPECT_TRUE(m.degenerate);
        const Matrix p = m.predict_proba(Matrix{{5.0}, {-3.0}});
        ASSERT_EQ(p.cols(), 1u);
        EXPECT_EQ(p(0, 0), 1.0);
        EXPECT_EQ(p(1, 0), 1.0);
    }
    const auto gb = fit_gradient_boosting(x, y, GBConfig{});
    EXPECT_TRUE(gb.degenerate);
    // One class present out of two declared: one-hot on the present class.
    const auto m2 = fit_forest(x, std::vector<int>{1, 1, 1}, ModelKind::forest, 1, {}, 2);
    EXPECT_EQ(m2.predict(Matrix{{0.0}}), std::vector<int>{1});
}

TEST(Forest, TreesRespectInvariants) {
    const auto b = support::make_blobs(25, {{0.0, 0.0, 0.0}, {2.0, 1.0, 0.0}, {0.0, 2.0, 1.0}}, 1.0, 8);
    ForestParams fp;
    fp.n_trees = 10;
    fp.max_depth = 3;
    const auto m = fit_forest(b.x, b.y, ModelKind::forest, 5, fp);
    for (const auto& t : m.trees) {
        EXPECT_LE(t.depth(), 3);
        for (const auto& node : t.nodes) {
            if (node.is_leaf()) {
                double s = 0.0;
                for (double v : node.value) s += v;
                EXPECT_NEAR(s, 1.0, 1e-9);
            } else {
                EXPECT_GE(node.left, 0);
                EXPECT_GE(node.right, 0);
            }
        }
    }
}

TEST(Forest, DeterministicAndThreadIndependent) {
    const auto b = support::make_blobs(30, {{0.0, 0.0}, {1.5, 1.5}}, 1.0, 2);
    ForestParams one;
    ForestParams many;
    many.threads = 4;
    for (auto kind : {ModelKind::forest, ModelKind::extra_trees}) {
        const auto a = fit_forest(b.x, b.y, kind, 34, one);
        const auto c = fit_forest(b.x, b.y, kind, 34, one);
        const auto d = fit_forest(b.x, b.y, kind, 34, many);
        EXPECT_EQ(a.trees, c.trees);
        EXPECT_EQ(a.trees, d.trees);
        EXPECT_NE(a.trees, fit_forest(b.x, b.y, kind, 35, one).trees);
    }
}

TEST(Forest, EnsembleNoWorseThanSingleTreeOnTraining) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const Matrix x = support::random_matrix(30, 3, seed);
        Rng rng(seed + 1000);
        std::vector<int> y;
        for (std::size_t i = 0; i < 30; ++i) y.push_back(static_cast<int>(rng.below(2)));
        if (std::count(y.begin(), y.end(), 1) == 0) y[0] = 1;
        ForestParams forest;
        forest.bootstrap = false;
        ForestParams single = forest;
        single.n_trees = 1;
        const double acc_forest = accuracy(y, fit_forest(x, y, ModelKind::forest, seed, forest).predict(x));
        const double acc_tree = accuracy(y, fit_forest(x, y, ModelKind::forest, seed, single).predict(x));
        EXPECT_GE(acc_forest, acc_tree);
    }
}

TEST(Predict, ArgmaxWithLowCodeTieBreak) {
    EXPECT_EQ(argmax_rows(Matrix{{0.5, 0.5}, {0.2, 0.8}, {0.25, 0.25}}), (std::vector<int>{0, 1, 0}));
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto b = support::make_blobs(20, {{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}}, 1.0, seed);
        ForestParams fp;
        fp.n_trees = 4;
        for (auto kind : {ModelKind::forest, ModelKind::extra_trees, ModelKind::gradient_boosting}) {
            const auto m = kind == ModelKind::gradient_boosting ? fit_gradient_boosting(b.x, b.y, GBConfig{})
                                                                : fit_forest(b.x, b.y, kind, seed, fp);
            const Matrix q = support::random_matrix(50, 2, seed + 7);
            const Matrix p = m.predict_proba(q);
            const auto pred = m.predict(q);
            for (std::size_t i = 0; i < q.rows(); ++i) {
                int arg = 0;
                for (std::size_t c = 1; c < p.cols(); ++c)
                    if (p(i, c) > p(i, static_cast<std::size_t>(arg))) arg = static_cast<int>(c);
                EXPECT_EQ(pred[i], arg);
                double s = 0.0;
                for (std::size_t c = 0; c < p.cols(); ++c) s += p(i, c);
                EXPECT_NEAR(s, 1.0, 1e-9);
            }
        }
    }
}

TEST(Predict, DimensionMismatch) {
    const auto b = corner_clusters(3);
    const auto m = fit_forest(b.x, b.y, ModelKind::forest, 1);
    try {
        m.predict_proba(Matrix{{1.0, 2.0, 3.0}});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::dimension);
    }
}

TEST(Boosting, OneDimensionalFixtureMatchesExhaustiveOracle) {
    const Matrix x{{0.0}, {1.0}, {2.0}, {3.0}};
    const std::vector<int> y{0, 0, 1, 1};
    const auto m = fit_gradient_boosting(x, y, GBConfig{});
    EXPECT_EQ(m.trees.size(), 10u);
    EXPECT_EQ(m.predict(x), y);
    EXPECT_DOUBLE_EQ(m.trees[0].nodes[0].threshold, 1.5);

    std::vector<double> grid;
    Matrix q(61, 1);
    for (int i = 0; i <= 60; ++i) {
        grid.push_back(-1.0 + 0.0833 * i);
        q(static_cast<std::size_t>(i), 0) = grid.back();
    }
    const auto oracle = boosting_oracle_scores({0, 1, 2, 3}, y, 10, 0.3, grid);
    const Matrix p = m.predict_proba(q);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        EXPECT_NEAR(p(i, 1), oracle[i], 1e-12);
        if (i > 0) EXPECT_GE(p(i, 1), p(i - 1, 1) - 1e-15);
    }
}

TEST(Boosting, DevianceNonIncreasing) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto b = support::make_blobs(40, {{0.0, 0.0}, {1.0, 1.0}}, 1.0, seed);
        const auto m = fit_gradient_boosting(b.x, b.y, GBConfig{});
        ASSERT_EQ(m.train_deviance.size(), 11u);
        for (std::size_t i = 1; i < m.train_deviance.size(); ++i) {
            EXPECT_LE(m.train_deviance[i], m.train_deviance[i - 1] + 1e-12);
        }
        const auto multi = support::make_blobs(30, {{0.0, 0.0}, {2.0, 0.0}, {0.0, 2.0}}, 1.0, seed);
        const auto mm = fit_gradient_boosting(multi.x, multi.y, GBConfig{});
        EXPECT_EQ(mm.trees.size(), 30u);
        for (std::size_t i = 1; i < mm.train_deviance.size(); ++i) {
            EXPECT_LE(mm.train_deviance[i], mm.train_deviance[i - 1] + 1e-12);
        }
    }
}

TEST(Boosting, ConfigErrors) {
    const Matrix x{{0.0}, {1.0}};
    const std::vector<int> y{0, 1};
    GBConfig cfg;
    cfg.n_estimators = 0;
    try {
        fit_gradient_boosting(x, y, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::config);
    }
    cfg = GBConfig{};
    cfg.learning_rate = 0.0;
    EXPECT_THROW(fit_gradient_boosting(x, y, cfg), Error);
}

TEST(Boosting, AbsentClassGetsZeroProbability) {
    const auto b = support::make_blobs(10, {{0.0, 0.0}, {5.0, 5.0}}, 1.0, 1);
    std::vector<int> y = b.y;
    for (int& v : y) v = v == 0 ? 0 : 2; // code 1 declared but unseen
    const auto m = fit_gradient_boosting(b.x, y, GBConfig{}, 3);
    const Matrix p = m.predict_proba(b.x);
    for (std::size_t i = 0; i < p.rows(); ++i) EXPECT_EQ(p(i, 1), 0.0);
    EXPECT_EQ(accuracy(y, m.predict(b.x)), 1.0);
}

TEST(Serialization, RoundTripPreservesPredictions) {
    const auto b = support::make_blobs(20, {{0.0, 0.0}, {2.0, 2.0}, {0.0, 3.0}}, 1.0, 6);
    ForestParams fp;
    fp.n_trees = 7;
    const std::vector<EnsembleModel> models = {fit_forest(b.x, b.y, ModelKind::forest, 1, fp),
                                               fit_forest(b.x, b.y, ModelKind::extra_trees, 1, fp),
                                               fit_gradient_boosting(b.x, b.y, GBConfig{}),
                                               fit_forest(b.x, std::vector<int>(b.y.size(), 2), ModelKind::forest, 1, fp, 3)};
    const Matrix q = support::random_matrix(40, 2, 3);
    for (const auto& m : models) {
        const auto text = to_json(m).dump();
        const auto back = model_from_json(nlohmann::json::parse(text));
        EXPECT_EQ(back.trees, m.trees);
        EXPECT_EQ(back.predict_proba(q), m.predict_proba(q));
    }
    auto bad = to_json(models[0]);
    bad["version"] = 99;
    EXPECT_THROW(model_from_json(bad), Error);
}
