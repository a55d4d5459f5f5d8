#include <gtest/gtest.h>

#include <numeric>
#include <set>

#include "test_support.hpp"
#include "trajal/metrics.hpp"

using namespace trajal;

TEST(WeightedF1, HandDerivedCase) {
    // class 0: P = 1, R = 1/2 -> F1 = 2/3; class 1: P = 2/3, R = 1 -> F1 = 4/5.
    // weighted: (2 * 2/3 + 2 * 4/5) / 4 = 11/15
    EXPECT_NEAR(weighted_f1(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 1, 1}), 11.0 / 15.0, 1e-12);
    EXPECT_NEAR(weighted_f1(std::vector<int>{0, 0, 1, 1}, std::vector<int>{0, 1, 1, 1}), 0.733333, 1e-6);
}

TEST(WeightedF1, PerfectAndAbsentClasses) {
    const std::vector<int> y{2, 0, 1, 1, 0, 2};
    EXPECT_DOUBLE_EQ(weighted_f1(y, y), 1.0);
    // Class 1 never predicted: contributes 0 without dividing by zero.
    EXPECT_NEAR(weighted_f1(std::vector<int>{0, 1}, std::vector<int>{0, 0}), 0.5 * (2.0 / 3.0), 1e-12);
    // Predicted-only class has zero support.
    EXPECT_DOUBLE_EQ(weighted_f1(std::vector<int>{0, 0}, std::vector<int>{0, 5}), 2.0 / 3.0);
}

TEST(WeightedF1, Errors) {
    EXPECT_THROW(weighted_f1(std::vector<int>{0}, std::vector<int>{0, 1}), Error);
    EXPECT_THROW(weighted_f1(std::vector<int>{}, std::vector<int>{}), Error);
}

TEST(WeightedF1, PermutationInvariantAndBounded) {
    Rng rng(9);
    std::vector<int> t(40), p(40);
    for (std::size_t i = 0; i < 40; ++i) {
        t[i] = static_cast<int>(rng.below(3));
        p[i] = static_cast<int>(rng.below(3));
    }
    const double base = weighted_f1(t, p);
    EXPECT_GE(base, 0.0);
    EXPECT_LE(base, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const auto perm = rng.permutation(40);
        std::vector<int> t2, p2;
        for (auto i : perm) {
            t2.push_back(t[i]);
            p2.push_back(p[i]);
        }
        EXPECT_NEAR(weighted_f1(t2, p2), base, 1e-12);
    }
}

TEST(Split, EightyTwenty) {
    const Matrix x = support::random_matrix(10, 2, 1);
    std::vector<int> y(10, 0);
    const auto s = split_train_test(x, y);
    EXPECT_EQ(s.x_train.rows(), 8u);
    EXPECT_EQ(s.x_test.rows(), 2u);
    const auto again = split_train_test(x, y);
    EXPECT_EQ(s.train_index, again.train_index);
    EXPECT_EQ(s.test_index, again.test_index);
    EXPECT_EQ(s.x_train.row(0)[0], x(s.train_index[0], 0));
}

TEST(Split, PartitionProperty) {
    Rng rng(4);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 5 + rng.below(200);
        const Matrix x(n, 1);
        const std::vector<int> y(n, 0);
        SplitConfig cfg;
        cfg.seed = rng.next();
        const auto s = split_train_test(x, y, cfg);
        std::set<std::size_t> all(s.train_index.begin(), s.train_index.end());
        for (auto i : s.test_index) EXPECT_TRUE(all.insert(i).second);
        EXPECT_EQ(all.size(), n);
        EXPECT_EQ(*all.rbegin(), n - 1);
        EXPECT_EQ(s.train_index.size(), static_cast<std::size_t>(std::ceil(0.8 * static_cast<double>(n) - 1e-9)));
    }
}

TEST(Split, TooSmall) {
    EXPECT_THROW(split_train_test(Matrix(4, 1), std::vector<int>(4, 0)), Error);
}
