#include <gtest/gtest.h>

#include <chrono>
#include <random>

#include "test_util.hpp"
#include "tvpath/restoration.hpp"

using namespace tvpath;

namespace {

struct ThreePoint {
    WeightedSignal ws = uniform_signal(std::vector<double>{0, 1, 0.5});
    PathResult path = solve_path(ws);
};

}  // namespace

TEST(Reconstruct, ZeroLambdaReturnsSignal) {
    ThreePoint e;
    const auto r = reconstruct(e.ws, e.path, 0.0);
    EXPECT_EQ(r.K(), 3u);
    EXPECT_EQ(expand(r), e.ws.y);
}

TEST(Reconstruct, HalfLambda) {
    ThreePoint e;
    const auto r = reconstruct(e.ws, e.path, 0.5);
    ASSERT_EQ(r.K(), 2u);
    EXPECT_EQ(r.bounds, (std::vector<std::size_t>{0, 1, 3}));
    EXPECT_NEAR(r.levels[0], 0.25, 1e-12);
    EXPECT_NEAR(r.levels[1], 0.625, 1e-12);
    EXPECT_EQ(r.cut_indices(), (std::vector<std::size_t>{0}));
    EXPECT_EQ(r.segment_of(2), 1u);
}

TEST(Reconstruct, FullMergeGivesMean) {
    ThreePoint e;
    const auto r = reconstruct(e.ws, e.path, 1.0);
    ASSERT_EQ(r.K(), 1u);
    EXPECT_NEAR(r.levels[0], 0.5, 1e-12);
}

TEST(Reconstruct, Errors) {
    ThreePoint e;
    EXPECT_THROW(reconstruct(e.ws, e.path, -1.0), input_error);
    const auto other = uniform_signal(std::vector<double>{0, 1});
    EXPECT_THROW(reconstruct(other, e.path, 1.0), input_error);
}

TEST(GOfLambda, ThreePoint) {
    ThreePoint e;
    EXPECT_EQ(g_of_lambda(e.path, 0.1), 3u);
    EXPECT_EQ(g_of_lambda(e.path, 0.5), 2u);
    EXPECT_EQ(g_of_lambda(e.path, 2.0), 1u);
    // Breakpoints belong to the coarser side.
    EXPECT_EQ(g_of_lambda(e.path, 1.0 / 3.0), 2u);
}

TEST(TotalVariation, Examples) {
    Restoration r;
    r.levels = {0.25, 0.625};
    EXPECT_DOUBLE_EQ(total_variation(r), 0.375);
    r.levels = {4.0};
    EXPECT_EQ(total_variation(r), 0.0);
    r.levels = {0, 1, 0.5};
    EXPECT_DOUBLE_EQ(total_variation(r), 1.5);
}

TEST(Reconstruct, OptimalityResidualAndDistinctLevels) {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 30; ++rep) {
        const auto ws = tvpath::testing::random_signal(rng, 100);
        const auto path = solve_path(ws);
        for (int k = 0; k < 15; ++k) {
            const double lam = path.max_lambda() * (k + 0.37) / 12.0;
            const auto r = reconstruct(ws, path, lam);
            EXPECT_EQ(r.bounds.front(), 0u);
            EXPECT_EQ(r.bounds.back(), ws.size());
            for (std::size_t j = 0; j < r.K(); ++j) {
                const double expect = r.seg_means[j] + lam * (r.signs[j + 1] - r.signs[j]) / (2 * r.seg_weights[j]);
                EXPECT_LE(std::abs(r.levels[j] - expect), 1e-9 * (1 + std::abs(r.levels[j])));
                if (j > 0) {
                    EXPECT_NE(r.levels[j], r.levels[j - 1]);
                    EXPECT_EQ(r.signs[j], sign_of(r.levels[j] - r.levels[j - 1]));
                }
            }
        }
    }
}

TEST(Reconstruct, LevelsLinearInsideBreakpointInterval) {
    std::mt19937_64 rng(32);
    const auto ws = tvpath::testing::random_signal(rng, 80);
    const auto path = solve_path(ws);
    auto grid = path.lambda;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
        const double a = grid[i] + 0.25 * (grid[i + 1] - grid[i]);
        const double b = grid[i] + 0.75 * (grid[i + 1] - grid[i]);
        const auto ra = reconstruct(ws, path, a);
        const auto rb = reconstruct(ws, path, b);
        ASSERT_EQ(ra.K(), rb.K());
        const auto beta = compute_beta(ra.signs, ra.seg_weights);
        for (std::size_t j = 0; j < ra.K(); ++j)
            EXPECT_NEAR(rb.levels[j], ra.levels[j] + (b - a) * beta[j], 1e-12 * (1 + std::abs(rb.levels[j])));
    }
}

TEST(GOfLambda, CountsExtremaOffBreakpoints) {
    std::mt19937_64 rng(33);
    for (int rep = 0; rep < 20; ++rep) {
        const auto ws = tvpath::testing::random_signal(rng, 70);
        const auto path = solve_path(ws);
        auto grid = path.lambda;
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double mid = std::sqrt(grid[i] * grid[i + 1]);
            EXPECT_EQ(g_of_lambda(path, mid), count_extrema(reconstruct(ws, path, mid).levels));
        }
    }
}

TEST(ExpandOriginal, UndoesCollapse) {
    const std::vector<double> t{0, 1, 2, 3, 4}, y{1, 1, 3, 3, 0};
    const auto ws = collapse_constant_pieces(build_weighted_signal(t, y));
    const auto path = solve_path(ws);
    EXPECT_EQ(expand_original(ws, reconstruct(ws, path, 0.0)), y);
    const auto u = expand_original(ws, reconstruct(ws, path, 100.0));
    for (double v : u) EXPECT_NEAR(v, 8.0 / 5.0, 1e-12);
}

// Doubling n should roughly double the time of a full reconstruction.
TEST(Reconstruct, LinearTime) {
    std::mt19937_64 rng(34);
    auto time_at = [&](std::size_t n) {
        const auto ws = tvpath::testing::random_signal(rng, n);
        const auto path = solve_path(ws);
        const double lam = path.max_lambda() / 10;
        double best = 1e300;
        for (int rep = 0; rep < 5; ++rep) {
            const auto t0 = std::chrono::steady_clock::now();
            const auto r = reconstruct(ws, path, lam);
            const auto t1 = std::chrono::steady_clock::now();
            EXPECT_GT(r.K(), 0u);
            best = std::min(best, std::chrono::duration<double>(t1 - t0).count());
        }
        return best;
    };
    const double small = time_at(200000);
    const double large = time_at(800000);
    EXPECT_LT(large / small, 8.0);
}
