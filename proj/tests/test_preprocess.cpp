#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "test_support.hpp"
#include "trajal/preprocess.hpp"

using namespace trajal;

TEST(ZScore, HandComputedColumn) {
    // mu = 2, sigma = sqrt(2/3): z = +-1 / sqrt(2/3) = +-1.2247448713915890
    const auto [z, p] = zscore_standardize(Matrix{{1.0}, {2.0}, {3.0}});
    EXPECT_NEAR(z(0, 0), -1.224744871391589, 1e-12);
    EXPECT_NEAR(z(1, 0), 0.0, 1e-12);
    EXPECT_NEAR(z(2, 0), 1.224744871391589, 1e-12);
    EXPECT_DOUBLE_EQ(p.mean[0], 2.0);
    EXPECT_NEAR(p.std[0], std::sqrt(2.0 / 3.0), 1e-15);
}

TEST(ZScore, ConstantColumnMapsToZero) {
    const auto [z, p] = zscore_standardize(Matrix{{5.0, 1.0}, {5.0, 2.0}, {5.0, 4.0}});
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(z(i, 0), 0.0);
    EXPECT_EQ(p.std[0], 0.0);
}

TEST(ZScore, MomentsAndFixedPointAndInverse) {
    const Matrix x = support::random_matrix(200, 5, 11, 7.0);
    const auto [z, p] = zscore_standardize(x);
    for (std::size_t j = 0; j < 5; ++j) {
        double m = 0.0, v = 0.0;
        for (std::size_t i = 0; i < 200; ++i) m += z(i, j);
        m /= 200.0;
        for (std::size_t i = 0; i < 200; ++i) v += (z(i, j) - m) * (z(i, j) - m);
        v /= 200.0;
        EXPECT_LT(std::abs(m), 1e-10);
        EXPECT_LT(std::abs(v - 1.0), 1e-8);
    }
    const auto [z2, p2] = zscore_standardize(z);
    for (std::size_t k = 0; k < z.data().size(); ++k) EXPECT_NEAR(z2.data()[k], z.data()[k], 1e-10);

    const Matrix back = p.inverse_transform(z);
    for (std::size_t k = 0; k < x.data().size(); ++k) EXPECT_NEAR(back.data()[k], x.data()[k], 1e-9);
}

TEST(ZScore, EmptyIsDimensionError) {
    EXPECT_THROW(zscore_standardize(Matrix{}), Error);
}

TEST(MinMax, Cases) {
    const auto [m, p] = minmax_rescale(Matrix{{2.0, 7.0, 0.0}, {4.0, 7.0, 1.0}, {6.0, 7.0, 0.0}});
    EXPECT_DOUBLE_EQ(m(0, 0), 0.0);
    EXPECT_DOUBLE_EQ(m(1, 0), 0.5);
    EXPECT_DOUBLE_EQ(m(2, 0), 1.0);
    for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(m(i, 1), 0.0);
    EXPECT_EQ(m(1, 2), 1.0);
    EXPECT_EQ(m(0, 2), 0.0);
    EXPECT_THROW(minmax_rescale(Matrix{}), Error);
}

TEST(MinMax, OutputsStayInUnitInterval) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto [m, p] = minmax_rescale(support::random_matrix(50, 4, seed, 1e3));
        for (double v : m.data()) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 1.0);
        }
    }
}

TEST(Labels, FirstAppearanceCodes) {
    const auto [codes, codec] = encode_labels({"b", "a", "b"});
    EXPECT_EQ(codes, (std::vector<int>{0, 1, 0}));
    EXPECT_EQ(codec.encode("b"), 0);
    EXPECT_EQ(codec.encode("a"), 1);
    const auto [one, c1] = encode_labels({"x", "x"});
    EXPECT_EQ(one, (std::vector<int>{0, 0}));
    EXPECT_EQ(c1.size(), 1u);
}

TEST(Labels, RoundTripAndStability) {
    Rng rng(5);
    const std::vector<std::string> alphabet = {"vessel", "not vessel", "animal", "car"};
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::string> labels;
        for (int i = 0; i < 30; ++i) labels.push_back(alphabet[rng.below(alphabet.size())]);
        const auto [codes, codec] = encode_labels(labels);
        for (std::size_t i = 0; i < labels.size(); ++i) EXPECT_EQ(codec.decode(codes[i]), labels[i]);

        // Shuffling the tail after the first occurrence of each label keeps earlier codes.
        std::vector<std::string> permuted = labels;
        std::size_t last_first = 0;
        for (const auto& l : codec.labels()) {
            last_first = std::max(last_first, static_cast<std::size_t>(std::find(labels.begin(), labels.end(), l) - labels.begin()));
        }
        std::vector<std::string> tail(permuted.begin() + static_cast<std::ptrdiff_t>(last_first) + 1, permuted.end());
        rng.shuffle(tail);
        std::copy(tail.begin(), tail.end(), permuted.begin() + static_cast<std::ptrdiff_t>(last_first) + 1);
        const auto [codes2, codec2] = encode_labels(permuted);
        EXPECT_EQ(codec2, codec);
    }
}
