#include <gtest/gtest.h>

#include <random>

#include "tvpath/signal.hpp"

using namespace tvpath;

TEST(BuildWeightedSignal, UnitSpacing) {
    const std::vector<double> t{0, 1, 2}, y{0, 1, 0.5};
    const auto ws = build_weighted_signal(t, y);
    EXPECT_EQ(ws.tau, (std::vector<double>{1, 1, 1}));
    EXPECT_EQ(ws.index_map, (std::vector<std::size_t>{0, 1, 2, 3}));
}

TEST(BuildWeightedSignal, FirstWeightCopiesSecondGap) {
    const std::vector<double> t{0, 2, 3}, y{5, 5, 5};
    EXPECT_EQ(build_weighted_signal(t, y).tau, (std::vector<double>{2, 2, 1}));
}

TEST(BuildWeightedSignal, IrregularGrid) {
    const std::vector<double> t{0, 1, 3, 3.5}, y{1, 2, 3, 4};
    EXPECT_EQ(build_weighted_signal(t, y).tau, (std::vector<double>{1, 1, 2, 0.5}));
}

TEST(BuildWeightedSignal, SingleSampleHasUnitWeight) {
    const std::vector<double> t{7}, y{3};
    EXPECT_EQ(build_weighted_signal(t, y).tau, (std::vector<double>{1}));
}

TEST(BuildWeightedSignal, Errors) {
    const std::vector<double> t{0, 1, 1, 2}, y{1, 2, 3, 4};
    try {
        build_weighted_signal(t, y);
        FAIL();
    } catch (const input_error& e) {
        EXPECT_NE(std::string(e.what()).find("index 2"), std::string::npos);
    }
    const std::vector<double> short_y{1, 2};
    EXPECT_THROW(build_weighted_signal(t, short_y), input_error);
    EXPECT_THROW(build_weighted_signal(std::vector<double>{}, std::vector<double>{}), input_error);
}

TEST(Collapse, MergesRuns) {
    const std::vector<double> y{1, 1, 2}, tau{1, 1, 1};
    const auto c = collapse_constant_pieces(signal_from_weights(y, tau));
    EXPECT_EQ(c.y, (std::vector<double>{1, 2}));
    EXPECT_EQ(c.tau, (std::vector<double>{2, 1}));
    EXPECT_EQ(c.index_map, (std::vector<std::size_t>{0, 2, 3}));
    EXPECT_EQ(c.original_size(), 3u);
}

TEST(Collapse, NoConstantPieceIsUnchanged) {
    const std::vector<double> y{0, 1, 0.5}, tau{1, 1, 1};
    const auto ws = signal_from_weights(y, tau);
    const auto c = collapse_constant_pieces(ws);
    EXPECT_EQ(c.y, ws.y);
    EXPECT_EQ(c.tau, ws.tau);
    EXPECT_FALSE(c.collapsed());
}

TEST(Collapse, SingleRun) {
    const std::vector<double> y{3, 3, 3}, tau{1, 2, 1};
    const auto c = collapse_constant_pieces(signal_from_weights(y, tau));
    EXPECT_EQ(c.y, (std::vector<double>{3}));
    EXPECT_EQ(c.tau, (std::vector<double>{4}));
}

TEST(Collapse, ExpandRepeatsOverRuns) {
    const std::vector<double> y{1, 1, 2, 2, 2, 3}, tau{1, 1, 1, 1, 1, 1};
    const auto c = collapse_constant_pieces(signal_from_weights(y, tau));
    const std::vector<double> u{10, 20, 30};
    EXPECT_EQ(expand_to_original(c, u), (std::vector<double>{10, 10, 20, 20, 20, 30}));
}

// Dyadic values keep every product and sum exact, so the weighted sums must
// match bit for bit.
TEST(Collapse, PropertiesOnRandomRuns) {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> level(-4, 4), weight(1, 8), len(1, 5);
    for (int rep = 0; rep < 200; ++rep) {
        std::vector<double> y, tau;
        const int runs = 1 + rep % 12;
        for (int r = 0; r < runs; ++r) {
            const double v = level(rng) * 0.25;
            for (int k = len(rng); k > 0; --k) {
                y.push_back(v);
                tau.push_back(weight(rng) * 0.5);
            }
        }
        const auto ws = signal_from_weights(y, tau);
        const auto c = collapse_constant_pieces(ws);
        double s0 = 0, s1 = 0, w0 = 0, w1 = 0;
        for (std::size_t i = 0; i < ws.size(); ++i) s0 += ws.tau[i] * ws.y[i], w0 += ws.tau[i];
        for (std::size_t i = 0; i < c.size(); ++i) s1 += c.tau[i] * c.y[i], w1 += c.tau[i];
        EXPECT_EQ(s0, s1);
        EXPECT_EQ(w0, w1);
        for (std::size_t i = 1; i < c.size(); ++i) EXPECT_NE(c.y[i], c.y[i - 1]);
        const auto cc = collapse_constant_pieces(c);
        EXPECT_EQ(cc.y, c.y);
        EXPECT_EQ(cc.tau, c.tau);
        EXPECT_EQ(cc.index_map, c.index_map);
        EXPECT_EQ(expand_to_original(c, c.y), ws.y);
    }
}
