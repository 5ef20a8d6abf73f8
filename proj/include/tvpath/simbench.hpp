#pragma once

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "tvpath/baselines.hpp"
#include "tvpath/io.hpp"
#include "tvpath/lambda_select.hpp"
#include "tvpath/path_solver.hpp"
#include "tvpath/restoration.hpp"
#include "tvpath/signal.hpp"
#include "tvpath/stream.hpp"

namespace tvpath::sim {

/// Amplitude that puts the 999-sample blocks signal at 16.91 dB against unit noise.
inline constexpr double kBlocksScale = 2.8425380460917107;

/**
 * Standard 11-jump blocks waveform sampled at t = (i+1)/n, scaled by
 * kBlocksScale. A sample exactly on a jump takes the midpoint value.
 */
inline std::vector<double> gen_blocks(std::size_t n) {
    static constexpr std::array<double, 11> where{0.1, 0.13, 0.15, 0.23, 0.25, 0.40, 0.44, 0.65, 0.76, 0.78, 0.81};
    static constexpr std::array<double, 11> height{4, -5, 3, -4, 5, -4.2, 2.1, 4.3, -3.1, 2.1, -4.2};
    std::vector<double> u(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i + 1) / static_cast<double>(n);
        double v = 0.0;
        for (std::size_t j = 0; j < where.size(); ++j) {
            const double step = t > where[j] ? 1.0 : (t == where[j] ? 0.5 : 0.0);
            v += height[j] * step;
        }
        u[i] = kBlocksScale * v;
    }
    return u;
}

enum class Periodic { pwc, pwl };

/// Square wave alternating low/high every half period, or a triangle wave
/// rising from low to high and back once per period.
inline std::vector<double> gen_periodic(Periodic kind, std::size_t n, std::size_t period, double low = 0.0,
                                        double high = 4.0) {
    if (period < 2) throw input_error("gen_periodic: period must be at least 2");
    std::vector<double> u(n);
    const double p = static_cast<double>(period);
    for (std::size_t i = 0; i < n; ++i) {
        const double phase = static_cast<double>(i % period) / p;
        if (kind == Periodic::pwc) {
            u[i] = phase < 0.5 ? low : high;
        } else {
            u[i] = low + (high - low) * (1.0 - std::abs(2.0 * phase - 1.0));
        }
    }
    return u;
}

/// Sum of independent N(0, sigma^2) and U[-a, a] draws.
struct NoiseSpec {
    double sigma = 1.0;
    double uniform_halfwidth = 0.0;

    double variance() const { return sigma * sigma + uniform_halfwidth * uniform_halfwidth / 3.0; }
};

inline std::vector<double> add_noise(std::span<const double> clean, const NoiseSpec& spec, std::mt19937_64& rng) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    std::vector<double> y(clean.begin(), clean.end());
    for (double& v : y) {
        if (spec.sigma > 0.0) v += spec.sigma * gauss(rng);
        if (spec.uniform_halfwidth > 0.0) v += spec.uniform_halfwidth * unif(rng);
    }
    return y;
}

/// Independent generator for replication `rep`, derived only from (seed, rep).
inline std::mt19937_64 replication_rng(std::uint64_t seed, std::size_t rep) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(rep), static_cast<std::uint32_t>(static_cast<std::uint64_t>(rep) >> 32)};
    return std::mt19937_64(seq);
}

enum class SignalKind { blocks, periodic_pwc, periodic_pwl, custom };
enum class Mode { selectors, timing };

/**
 * Flat key=value experiment description. Selectors: "ours" (q from the
 * config), "ours@X" (log10 q = X), "aut", "aut-literal", "sure", "cv",
 * "min".
 */
struct ExperimentConfig {
    Mode mode = Mode::selectors;
    SignalKind signal = SignalKind::blocks;
    std::string custom_csv;
    std::size_t n = 999;
    std::size_t period = 50;
    NoiseSpec noise;
    std::size_t replications = 100;
    std::uint64_t seed = 1;
    std::vector<std::string> selectors{"ours", "aut", "sure", "min"};
    std::optional<double> q;
    std::size_t folds = 10;
    bool estimate_sigma = false;
    std::size_t threads = 0;
    bool record_time = false;
    std::size_t n_start = 50;
    LambdaHatRule policy;

    void set(const std::string& key, const std::string& value);
    void validate() const;
    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig load(const std::string& file);
};

namespace detail {

inline double to_number(const std::string& key, const std::string& value) {
    const auto v = io::detail::parse_double(value);
    if (!v || !std::isfinite(*v)) throw input_error("config: '" + key + "' expects a number, got '" + value + "'");
    return *v;
}

inline std::size_t to_count(const std::string& key, const std::string& value) {
    const double v = to_number(key, value);
    if (v < 0 || v != std::floor(v)) throw input_error("config: '" + key + "' expects a non-negative integer");
    return static_cast<std::size_t>(v);
}

inline bool to_flag(const std::string& key, const std::string& value) {
    if (value == "on" || value == "true" || value == "1" || value == "yes") return true;
    if (value == "off" || value == "false" || value == "0" || value == "no") return false;
    throw input_error("config: '" + key + "' expects on/off");
}

}  // namespace detail

inline void ExperimentConfig::set(const std::string& key, const std::string& value) {
    if (key == "mode") {
        if (value == "selectors") mode = Mode::selectors;
        else if (value == "timing") mode = Mode::timing;
        else throw input_error("config: mode must be selectors or timing");
    } else if (key == "signal") {
        if (value == "blocks") signal = SignalKind::blocks;
        else if (value == "periodic-pwc") signal = SignalKind::periodic_pwc;
        else if (value == "periodic-pwl") signal = SignalKind::periodic_pwl;
        else if (value.rfind("csv:", 0) == 0) {
            signal = SignalKind::custom;
            custom_csv = value.substr(4);
        } else {
            throw input_error("config: unknown signal '" + value + "'");
        }
    } else if (key == "n") {
        n = detail::to_count(key, value);
    } else if (key == "period") {
        period = detail::to_count(key, value);
    } else if (key == "sigma") {
        noise.sigma = detail::to_number(key, value);
    } else if (key == "uniform") {
        noise.uniform_halfwidth = detail::to_number(key, value);
    } else if (key == "replications") {
        replications = detail::to_count(key, value);
    } else if (key == "seed") {
        seed = static_cast<std::uint64_t>(detail::to_count(key, value));
    } else if (key == "selectors") {
        selectors.clear();
        for (auto part : io::detail::split(value, ',')) {
            const std::string s(part);
            const bool known = s == "ours" || s == "aut" || s == "aut-literal" || s == "sure" || s == "cv" || s == "min" ||
                               (s.rfind("ours@", 0) == 0 && io::detail::parse_double(s.substr(5)));
            if (!known) throw input_error("config: unknown selector '" + s + "'");
            selectors.push_back(s);
        }
    } else if (key == "q") {
        if (value == "auto") q.reset();
        else q = detail::to_number(key, value);
    } else if (key == "folds") {
        folds = detail::to_count(key, value);
    } else if (key == "sigma_source") {
        if (value == "known") estimate_sigma = false;
        else if (value == "mad") estimate_sigma = true;
        else throw input_error("config: sigma_source must be known or mad");
    } else if (key == "threads") {
        threads = detail::to_count(key, value);
    } else if (key == "record_time") {
        record_time = detail::to_flag(key, value);
    } else if (key == "n_start") {
        n_start = detail::to_count(key, value);
    } else if (key == "policy") {
        policy = LambdaHatRule::parse(value);
    } else {
        throw input_error("config: unknown key '" + key + "'");
    }
}

inline void ExperimentConfig::validate() const {
    if (replications < 1) throw input_error("config: replications must be at least 1");
    if (noise.sigma < 0 || noise.uniform_halfwidth < 0) throw input_error("config: noise levels must be >= 0");
    if (n < 1) throw input_error("config: n must be at least 1");
    if (q && !(*q > 1.0)) throw input_error("config: q must exceed 1");
    if (mode == Mode::timing && n_start > n) throw input_error("config: n_start exceeds n");
    if (signal != SignalKind::custom && signal != SignalKind::blocks && period < 2)
        throw input_error("config: period must be at least 2");
}

inline ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    ExperimentConfig cfg;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto body = io::detail::trim(std::string_view(line).substr(0, line.find('#')));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) throw input_error("config: expected key=value at line " + std::to_string(line_no));
        cfg.set(std::string(io::detail::trim(body.substr(0, eq))), std::string(io::detail::trim(body.substr(eq + 1))));
    }
    cfg.validate();
    return cfg;
}

inline ExperimentConfig ExperimentConfig::load(const std::string& file) {
    std::ifstream in(file);
    if (!in) throw input_error("cannot open config '" + file + "'");
    return parse(in);
}

inline std::vector<double> clean_signal(const ExperimentConfig& cfg) {
    switch (cfg.signal) {
        case SignalKind::blocks: return gen_blocks(cfg.n);
        case SignalKind::periodic_pwc: return gen_periodic(Periodic::pwc, cfg.n, cfg.period);
        case SignalKind::periodic_pwl: return gen_periodic(Periodic::pwl, cfg.n, cfg.period);
        case SignalKind::custom: {
            std::ifstream in(cfg.custom_csv);
            if (!in) throw input_error("cannot open signal file '" + cfg.custom_csv + "'");
            return io::read_samples(in).y;
        }
    }
    return {};
}

/// One selector on one replication.
struct ReplicationRow {
    std::size_t replication = 0;
    std::string selector;
    double lambda = 0.0;
    double risk = 0.0;
    double d = 0.0;
    double seconds = 0.0;
};

struct SelectorSummary {
    std::string selector;
    double mean_risk100 = 0.0;
    double mean_lambda = 0.0;
    double d_q25 = 0.0;
    double d_median = 0.0;
    double d_q75 = 0.0;
    double min_d = 0.0;
    double mean_seconds = 0.0;
};

struct ExperimentReport {
    std::vector<ReplicationRow> rows;
    std::vector<SelectorSummary> summary;
};

/// Linear-interpolated quantile of an unsorted sample.
inline double quantile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

/// Run body(i) for i in [0, count) on `threads` workers (0 = hardware).
template <class Body>
void parallel_for(std::size_t count, std::size_t threads, Body&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(threads);
    for (std::size_t w = 0; w < threads; ++w)
        pool.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += threads) body(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    for (auto& th : pool) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

/// All selectors of the config on one noisy realisation.
inline std::vector<ReplicationRow> run_replication(const ExperimentConfig& cfg, std::span<const double> clean,
                                                   std::size_t rep) {
    auto rng = replication_rng(cfg.seed, rep);
    const auto y = add_noise(clean, cfg.noise, rng);
    const auto original = uniform_signal(y);
    const auto ws = collapse_constant_pieces(original);
    const auto path = solve_path(ws);
    const auto op = optimal_lambda(ws, path, clean);
    const double sigma = cfg.estimate_sigma ? estimate_sigma(y) : std::sqrt(cfg.noise.variance());
    const auto ladder = build_g_ladder(path);

    std::vector<ReplicationRow> rows;
    for (const auto& name : cfg.selectors) {
        const auto t0 = std::chrono::steady_clock::now();
        double lambda = 0.0;
        if (name == "min") {
            lambda = op.lambda;
        } else if (name == "ours" || name.rfind("ours@", 0) == 0) {
            std::optional<double> q = cfg.q;
            if (name != "ours") q = std::pow(10.0, *io::detail::parse_double(name.substr(5)));
            lambda = ladder.size() ? select_lambda(ladder, q).lambda_ours : 0.0;
        } else if (name == "aut") {
            lambda = aut_select(ws, path, sigma).lambda;
        } else if (name == "aut-literal") {
            lambda = aut_select(ws, path, sigma, AutScale::literal).lambda;
        } else if (name == "sure") {
            lambda = sure_select(ws, path, sigma).lambda;
        } else if (name == "cv") {
            lambda = cv_select(original, cfg.folds, default_candidates(path), cfg.seed + rep).lambda;
        }
        const auto t1 = std::chrono::steady_clock::now();
        ReplicationRow row;
        row.replication = rep;
        row.selector = name;
        row.lambda = lambda;
        row.risk = name == "min" ? op.error : error_at(ws, path, clean, lambda);
        row.d = row.risk - op.error;
        row.seconds = cfg.record_time ? std::chrono::duration<double>(t1 - t0).count() : 0.0;
        rows.push_back(row);
    }
    return rows;
}

/**
 * Replications run in parallel; each one draws its noise from its own
 * generator, so the report does not depend on scheduling. Timings are only
 * recorded when record_time is set since they are not reproducible.
 */
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto clean = clean_signal(cfg);
    std::vector<std::vector<ReplicationRow>> per_rep(cfg.replications);
    parallel_for(cfg.replications, cfg.threads, [&](std::size_t r) { per_rep[r] = run_replication(cfg, clean, r); });

    ExperimentReport rep;
    for (auto& rows : per_rep) rep.rows.insert(rep.rows.end(), rows.begin(), rows.end());
    for (const auto& name : cfg.selectors) {
        SelectorSummary s;
        s.selector = name;
        std::vector<double> ds;
        for (const auto& row : rep.rows) {
            if (row.selector != name) continue;
            s.mean_risk100 += 100.0 * row.risk;
            s.mean_lambda += row.lambda;
            s.mean_seconds += row.seconds;
            ds.push_back(row.d);
        }
        const double count = static_cast<double>(ds.size());
        s.mean_risk100 /= count;
        s.mean_lambda /= count;
        s.mean_seconds /= count;
        s.d_q25 = quantile(ds, 0.25);
        s.d_median = quantile(ds, 0.5);
        s.d_q75 = quantile(ds, 0.75);
        s.min_d = *std::min_element(ds.begin(), ds.end());
        rep.summary.push_back(s);
    }
    return rep;
}

/// Mean per-step cost at every signal length of the timing protocol.
struct TimingRow {
    std::size_t n = 0;
    double online_ms = 0.0;
    double offline_ms = 0.0;
};

struct TimingReport {
    std::vector<TimingRow> rows;
    double online_total_ms = 0.0;
    double offline_total_ms = 0.0;
};

/// Offline work for one step: path, ladder and selection from scratch.
inline double offline_step(const WeightedSignal& ws) {
    const auto path = solve_path(ws);
    const auto ladder = build_g_ladder(path);
    return ladder.size() ? select_lambda(ladder).lambda_ours : 0.0;
}

/**
 * Stream each replication sample by sample; from n_start on, time the
 * online push against a full offline recomputation on the same prefix.
 * Timings are single-threaded to keep them comparable.
 */
inline TimingReport run_timing(const ExperimentConfig& cfg) {
    cfg.validate();
    const auto clean = clean_signal(cfg);
    const std::size_t n = clean.size();
    const std::size_t first = std::max<std::size_t>(cfg.n_start, 1);
    TimingReport rep;
    rep.rows.resize(n >= first ? n - first + 1 : 0);
    for (std::size_t k = 0; k < rep.rows.size(); ++k) rep.rows[k].n = first + k;

    volatile double sink = 0.0;
    for (std::size_t r = 0; r < cfg.replications; ++r) {
        auto rng = replication_rng(cfg.seed, r);
        const auto y = add_noise(clean, cfg.noise, rng);
        StreamOptions opt;
        opt.rule = cfg.policy;
        opt.q = cfg.q;
        StreamState state(opt);
        for (std::size_t i = 0; i < n; ++i) {
            const auto t0 = std::chrono::steady_clock::now();
            push_sample(state, static_cast<double>(i), y[i]);
            const auto t1 = std::chrono::steady_clock::now();
            if (i + 1 < first) continue;
            const auto t2 = std::chrono::steady_clock::now();
            sink = sink + offline_step(state.ws);
            const auto t3 = std::chrono::steady_clock::now();
            auto& row = rep.rows[i + 1 - first];
            row.online_ms += std::chrono::duration<double, std::milli>(t1 - t0).count();
            row.offline_ms += std::chrono::duration<double, std::milli>(t3 - t2).count();
        }
    }
    for (auto& row : rep.rows) {
        row.online_ms /= static_cast<double>(cfg.replications);
        row.offline_ms /= static_cast<double>(cfg.replications);
        rep.online_total_ms += row.online_ms;
        rep.offline_total_ms += row.offline_ms;
    }
    return rep;
}

inline void write_rows_csv(std::ostream& out, const ExperimentReport& r) {
    out << "replication,selector,lambda,risk,d,seconds\n";
    for (const auto& row : r.rows)
        out << row.replication << ',' << row.selector << ',' << io::csv_number(row.lambda) << ','
            << io::csv_number(row.risk) << ',' << io::csv_number(row.d) << ',' << io::csv_number(row.seconds) << '\n';
}

inline void write_summary_csv(std::ostream& out, const ExperimentReport& r) {
    out << "selector,mean_risk100,mean_lambda,d_q25,d_median,d_q75,min_d,mean_seconds\n";
    for (const auto& s : r.summary)
        out << s.selector << ',' << io::csv_number(s.mean_risk100) << ',' << io::csv_number(s.mean_lambda) << ','
            << io::csv_number(s.d_q25) << ',' << io::csv_number(s.d_median) << ',' << io::csv_number(s.d_q75) << ','
            << io::csv_number(s.min_d) << ',' << io::csv_number(s.mean_seconds) << '\n';
}

inline io::json to_json(const ExperimentReport& r) {
    io::json j;
    j["summary"] = io::json::array();
    for (const auto& s : r.summary)
        j["summary"].push_back({{"selector", s.selector},
                                {"mean_risk100", s.mean_risk100},
                                {"mean_lambda", s.mean_lambda},
                                {"d_q25", s.d_q25},
                                {"d_median", s.d_median},
                                {"d_q75", s.d_q75},
                                {"min_d", s.min_d},
                                {"mean_seconds", s.mean_seconds}});
    j["rows"] = io::json::array();
    for (const auto& row : r.rows)
        j["rows"].push_back({{"replication", row.replication},
                             {"selector", row.selector},
                             {"lambda", row.lambda},
                             {"risk", row.risk},
                             {"d", row.d},
                             {"seconds", row.seconds}});
    return j;
}

inline void write_timing_csv(std::ostream& out, const TimingReport& r) {
    out << "n,online_ms,offline_ms\n";
    for (const auto& row : r.rows)
        out << row.n << ',' << io::csv_number(row.online_ms) << ',' << io::csv_number(row.offline_ms) << '\n';
}

inline io::json to_json(const TimingReport& r) {
    io::json j{{"online_total_ms", r.online_total_ms}, {"offline_total_ms", r.offline_total_ms}};
    j["rows"] = io::json::array();
    for (const auto& row : r.rows)
        j["rows"].push_back({{"n", row.n}, {"online_ms", row.online_ms}, {"offline_ms", row.offline_ms}});
    return j;
}

}  // namespace tvpath::sim
