#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "tvpath/simbench.hpp"

using namespace tvpath;
using namespace tvpath::sim;

namespace {

double snr_db(const std::vector<double>& u) {
    double p = 0.0;
    for (double v : u) p += v * v;
    return 10.0 * std::log10(p / static_cast<double>(u.size()));
}

std::size_t distinct_runs(const std::vector<double>& u) {
    std::size_t runs = u.empty() ? 0 : 1;
    for (std::size_t i = 1; i < u.size(); ++i) runs += u[i] != u[i - 1];
    return runs;
}

ExperimentConfig from_text(const std::string& text) {
    std::istringstream in(text);
    return ExperimentConfig::parse(in);
}

}  // namespace

TEST(Blocks, PowerMatchesCalibration) {
    const auto u = gen_blocks(999);
    ASSERT_EQ(u.size(), 999u);
    EXPECT_NEAR(snr_db(u), 16.91, 0.05);
}

TEST(Blocks, TwelveLevels) {
    const auto u = gen_blocks(999);
    std::set<double> levels(u.begin(), u.end());
    EXPECT_EQ(levels.size(), 12u);
    EXPECT_EQ(distinct_runs(u), 12u);
}

TEST(Blocks, SingleSampleIsConstant) {
    const auto u = gen_blocks(1);
    ASSERT_EQ(u.size(), 1u);
    EXPECT_TRUE(std::isfinite(u[0]));
}

TEST(Periodic, SquareWave) {
    const auto u = gen_periodic(Periodic::pwc, 200, 50);
    std::set<double> levels(u.begin(), u.end());
    EXPECT_EQ(levels, (std::set<double>{0.0, 4.0}));
    EXPECT_EQ(distinct_runs(u), 8u);
    for (std::size_t i = 0; i + 50 < u.size(); ++i) EXPECT_EQ(u[i], u[i + 50]);
}

TEST(Periodic, TriangleWave) {
    const auto u = gen_periodic(Periodic::pwl, 100, 50);
    EXPECT_EQ(u[0], 0.0);
    EXPECT_EQ(u[25], 4.0);
    EXPECT_EQ(u[50], 0.0);
    for (std::size_t i = 1; i <= 25; ++i) EXPECT_GT(u[i], u[i - 1]);
    for (std::size_t i = 26; i < 50; ++i) EXPECT_LT(u[i], u[i - 1]);
}

TEST(Periodic, LongPeriodGivesSingleRamp) {
    const auto ramp = gen_periodic(Periodic::pwl, 20, 100);
    for (std::size_t i = 1; i < ramp.size(); ++i) EXPECT_GT(ramp[i], ramp[i - 1]);
    const auto step = gen_periodic(Periodic::pwc, 20, 100);
    EXPECT_EQ(distinct_runs(step), 1u);
    EXPECT_THROW(gen_periodic(Periodic::pwc, 20, 1), input_error);
}

TEST(Noise, VarianceWithinOnePercent) {
    const std::vector<double> zero(1'000'000, 0.0);
    for (const NoiseSpec spec : {NoiseSpec{1.0, 0.0}, NoiseSpec{2.0, 2.0}, NoiseSpec{0.0, 3.0}}) {
        auto rng = replication_rng(7, 0);
        const auto y = add_noise(zero, spec, rng);
        const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
        double var = 0.0;
        for (double v : y) var += (v - mean) * (v - mean);
        var /= static_cast<double>(y.size() - 1);
        EXPECT_NEAR(var / spec.variance(), 1.0, 0.01);
    }
}

TEST(Noise, StreamsDependOnSeedAndReplication) {
    auto a = replication_rng(1, 0), b = replication_rng(1, 0), c = replication_rng(1, 1), d = replication_rng(2, 0);
    const auto x = a();
    EXPECT_EQ(x, b());
    EXPECT_NE(x, c());
    EXPECT_NE(x, d());
}

TEST(Config, ParsesKeys) {
    const auto cfg = from_text(
        "# comment\n"
        "signal = periodic-pwl\n"
        "n = 500   # trailing comment\n"
        "sigma = 2\nuniform = 2\nreplications = 7\nseed = 42\n"
        "selectors = ours, ours@0.5, aut, aut-literal, sure, cv, min\n"
        "q = 5\nfolds = 5\nsigma_source = mad\nthreads = 2\nrecord_time = on\n"
        "mode = timing\nn_start = 60\npolicy = fixed:3\n");
    EXPECT_EQ(cfg.signal, SignalKind::periodic_pwl);
    EXPECT_EQ(cfg.n, 500u);
    EXPECT_EQ(cfg.noise.sigma, 2.0);
    EXPECT_EQ(cfg.noise.uniform_halfwidth, 2.0);
    EXPECT_EQ(cfg.replications, 7u);
    EXPECT_EQ(cfg.seed, 42u);
    EXPECT_EQ(cfg.selectors.size(), 7u);
    EXPECT_EQ(cfg.selectors[1], "ours@0.5");
    ASSERT_TRUE(cfg.q.has_value());
    EXPECT_EQ(*cfg.q, 5.0);
    EXPECT_EQ(cfg.folds, 5u);
    EXPECT_TRUE(cfg.estimate_sigma);
    EXPECT_TRUE(cfg.record_time);
    EXPECT_EQ(cfg.mode, Mode::timing);
    EXPECT_EQ(cfg.n_start, 60u);
    EXPECT_EQ(cfg.policy.policy, LambdaHatPolicy::fixed);
    EXPECT_EQ(cfg.policy.fixed_value, 3.0);
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(from_text("replications = 0\n"), input_error);
    EXPECT_THROW(from_text("sigma = -1\n"), input_error);
    EXPECT_THROW(from_text("colour = red\n"), input_error);
    EXPECT_THROW(from_text("n\n"), input_error);
    EXPECT_THROW(from_text("n = 3.5\n"), input_error);
    EXPECT_THROW(from_text("selectors = ours, magic\n"), input_error);
    EXPECT_THROW(from_text("q = 1\n"), input_error);
    EXPECT_THROW(from_text("signal = doppler\n"), input_error);
    EXPECT_THROW(ExperimentConfig::load("/nonexistent/file.cfg"), input_error);
}

TEST(Quantile, Interpolates) {
    EXPECT_EQ(quantile({3, 1, 2, 4}, 0.5), 2.5);
    EXPECT_EQ(quantile({5}, 0.25), 5.0);
    EXPECT_EQ(quantile({0, 10}, 0.25), 2.5);
}

TEST(Sigma, MadOnBlocks) {
    const auto clean = gen_blocks(999);
    for (std::size_t rep = 0; rep < 5; ++rep) {
        auto rng = replication_rng(3, rep);
        const auto y = add_noise(clean, NoiseSpec{}, rng);
        const double s = estimate_sigma(y);
        EXPECT_GT(s, 0.9);
        EXPECT_LT(s, 1.1);
    }
}

TEST(Experiment, SingleReplicationSmoke) {
    auto cfg = from_text("replications = 1\nn = 200\nselectors = ours, aut, sure, cv, min\n");
    const auto rep = run_experiment(cfg);
    ASSERT_EQ(rep.rows.size(), 5u);
    ASSERT_EQ(rep.summary.size(), 5u);
    for (const auto& row : rep.rows) {
        EXPECT_GE(row.d, -1e-12) << row.selector;
        EXPECT_GE(row.lambda, 0.0);
    }
    EXPECT_EQ(rep.summary.back().selector, "min");
    EXPECT_EQ(rep.summary.back().min_d, 0.0);
}

TEST(Experiment, BitReproducible) {
    auto cfg = from_text("replications = 6\nn = 300\nthreads = 3\nselectors = ours, aut, sure, cv, min\n");
    const auto a = to_json(run_experiment(cfg)).dump();
    cfg.threads = 1;
    const auto b = to_json(run_experiment(cfg)).dump();
    EXPECT_EQ(a, b);
    cfg.seed = 2;
    EXPECT_NE(a, to_json(run_experiment(cfg)).dump());
}

TEST(Experiment, CsvOutputs) {
    const auto rep = run_experiment(from_text("replications = 2\nn = 100\nselectors = ours, min\n"));
    std::ostringstream rows, summary;
    write_rows_csv(rows, rep);
    write_summary_csv(summary, rep);
    const auto r = rows.str(), s = summary.str();
    EXPECT_EQ(std::count(r.begin(), r.end(), '\n'), 5);
    EXPECT_EQ(s.substr(0, 9), "selector,");
    EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 3);
}

TEST(Timing, ProducesRowsPerLength) {
    auto cfg = from_text("mode = timing\nsignal = periodic-pwl\nn = 80\nsigma = 2\nreplications = 2\nn_start = 50\n");
    const auto rep = run_timing(cfg);
    ASSERT_EQ(rep.rows.size(), 31u);
    EXPECT_EQ(rep.rows.front().n, 50u);
    EXPECT_EQ(rep.rows.back().n, 80u);
    EXPECT_GT(rep.offline_total_ms, 0.0);
    std::ostringstream out;
    write_timing_csv(out, rep);
    EXPECT_EQ(out.str().substr(0, 21), "n,online_ms,offline_m");
}
