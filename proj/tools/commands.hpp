#pragma once

// Command implementations behind the tvpath executable. They only touch the
// streams and files they are given, so tests can drive them directly.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "tvpath/tvpath.hpp"

namespace tvpath::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3 };

struct SelectOptions {
    std::optional<double> lambda;
    std::string method = "ours";
    std::optional<double> sigma;
    std::optional<double> q;
    std::size_t folds = 10;
    std::uint64_t seed = 1;
};

struct DenoiseOptions {
    SelectOptions select;
    std::string emit_path;
};

struct StreamCliOptions {
    std::string policy = "ours";
    std::optional<double> q;
    std::string emit_path;
};

struct BenchOptions {
    std::string config;
    std::string output_dir = ".";
    std::optional<std::uint64_t> seed;
    std::vector<std::string> overrides;
};

struct VerifyOptions {
    std::vector<double> lambdas;
    std::size_t grid = 20;
    double tolerance = 1e-6;
};

/// Chosen lambda plus the line reported on the diagnostic stream.
struct Choice {
    double lambda = 0.0;
    std::string method;
    std::optional<double> sigma;
};

namespace detail {

inline void write_json_file(const std::string& file, const io::json& j) {
    std::ofstream out(file);
    if (!out) throw input_error("cannot write '" + file + "'");
    out << j.dump() << '\n';
}

inline WeightedSignal load_signal(std::istream& in, WeightedSignal* original = nullptr) {
    const auto samples = io::read_samples(in);
    auto raw = build_weighted_signal(samples.t, samples.y);
    auto ws = collapse_constant_pieces(raw);
    if (original) *original = std::move(raw);
    return ws;
}

}  // namespace detail

inline Choice choose_lambda(const WeightedSignal& original, const WeightedSignal& ws, const PathResult& path,
                            const SelectOptions& opt) {
    Choice c;
    if (opt.lambda) {
        if (!(*opt.lambda >= 0.0)) throw input_error("--lambda must be non-negative");
        c.lambda = *opt.lambda;
        c.method = "fixed";
        return c;
    }
    c.method = opt.method;
    const auto sigma = [&] {
        if (opt.sigma) return *opt.sigma;
        return estimate_sigma(original.y);
    };
    if (opt.method == "ours") {
        const auto ladder = build_g_ladder(path);
        c.lambda = ladder.size() ? select_lambda(ladder, opt.q).lambda_ours : 0.0;
    } else if (opt.method == "aut" || opt.method == "aut-literal") {
        c.sigma = sigma();
        const auto scale = opt.method == "aut" ? AutScale::half_fidelity : AutScale::literal;
        c.lambda = aut_select(ws, path, *c.sigma, scale).lambda;
    } else if (opt.method == "sure") {
        c.sigma = sigma();
        c.lambda = sure_select(ws, path, *c.sigma).lambda;
    } else if (opt.method == "cv") {
        c.lambda = cv_select(original, opt.folds, default_candidates(path), opt.seed).lambda;
    } else {
        throw input_error("unknown method '" + opt.method + "'");
    }
    return c;
}

/// t,y in; t,y,u out. Chosen lambda, K and g go to `diag`.
inline int cmd_denoise(std::istream& in, std::ostream& out, std::ostream& diag, const DenoiseOptions& opt) {
    WeightedSignal original;
    const auto ws = detail::load_signal(in, &original);
    const auto path = solve_path(ws);
    const auto choice = choose_lambda(original, ws, path, opt.select);
    const auto r = reconstruct(ws, path, choice.lambda);
    io::write_denoised_csv(out, original.t, original.y, expand_original(ws, r));
    diag << "method=" << choice.method << " lambda=" << io::csv_number(choice.lambda) << " K=" << r.K()
         << " g=" << g_of_lambda(path, choice.lambda);
    if (choice.sigma) diag << " sigma=" << io::csv_number(*choice.sigma);
    diag << '\n';
    if (!opt.emit_path.empty()) detail::write_json_file(opt.emit_path, io::to_json(path));
    return kOk;
}

/// Merge values and extremum-count changes of the (collapsed) input as JSON.
inline int cmd_path(std::istream& in, std::ostream& out) {
    const auto ws = detail::load_signal(in);
    out << io::to_json(solve_path(ws)).dump() << '\n';
    return kOk;
}

/**
 * One row "n,lambda_ours,K,last_level" per sample. A "#path" line prints the
 * current path as "#path {json}"; with emit_path the final path is also
 * written to that file at end of input.
 */
inline int cmd_stream(std::istream& in, std::ostream& out, const StreamCliOptions& opt) {
    StreamOptions so;
    so.rule = LambdaHatRule::parse(opt.policy);
    so.q = opt.q;
    StreamState state(so);
    std::string line;
    std::size_t line_no = 0;
    std::optional<bool> has_time;
    while (std::getline(in, line)) {
        ++line_no;
        if (io::detail::trim(line) == "#path") {
            out << "#path " << io::to_json(state.path).dump() << '\n' << std::flush;
            continue;
        }
        if (line_no == 1 && io::looks_like_header(line)) continue;
        const auto row = io::parse_sample_line(line, line_no);
        if (!row) continue;
        const bool timed = row->first.has_value();
        if (has_time && *has_time != timed)
            throw input_error("inconsistent column count at line " + std::to_string(line_no));
        has_time = timed;
        const double t = timed ? *row->first : static_cast<double>(state.size());
        try {
            push_sample(state, t, row->second);
        } catch (const input_error& e) {
            throw input_error(std::string(e.what()) + " (line " + std::to_string(line_no) + ")");
        }
        const auto rep = stream_report(state);
        out << rep.n << ',' << io::csv_number(rep.lambda_ours) << ',' << rep.K << ','
            << io::csv_number(rep.last_level) << '\n';
    }
    out << std::flush;
    if (!opt.emit_path.empty()) detail::write_json_file(opt.emit_path, io::to_json(state.path));
    return kOk;
}

/**
 * Run a benchmark config. Selector experiments write rows.csv, summary.csv
 * and report.json; timing runs write timing.csv and report.json. The
 * summary (or the timing totals) is echoed to `out`.
 */
inline int cmd_bench(std::ostream& out, const BenchOptions& opt) {
    auto cfg = sim::ExperimentConfig::load(opt.config);
    for (const auto& kv : opt.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw input_error("--set expects key=value, got '" + kv + "'");
        cfg.set(std::string(io::detail::trim(std::string_view(kv).substr(0, eq))),
                std::string(io::detail::trim(std::string_view(kv).substr(eq + 1))));
    }
    if (opt.seed) cfg.seed = *opt.seed;
    cfg.validate();

    const std::filesystem::path dir(opt.output_dir);
    std::filesystem::create_directories(dir);
    const auto open = [&](const char* name) {
        std::ofstream f(dir / name);
        if (!f) throw input_error("cannot write '" + (dir / name).string() + "'");
        return f;
    };
    if (cfg.mode == sim::Mode::timing) {
        const auto rep = sim::run_timing(cfg);
        auto csv = open("timing.csv");
        sim::write_timing_csv(csv, rep);
        open("report.json") << sim::to_json(rep).dump(2) << '\n';
        out << "online_total_ms," << io::csv_number(rep.online_total_ms) << '\n'
            << "offline_total_ms," << io::csv_number(rep.offline_total_ms) << '\n'
            << "speedup," << io::csv_number(rep.offline_total_ms / rep.online_total_ms) << '\n';
        return kOk;
    }
    const auto rep = sim::run_experiment(cfg);
    auto rows = open("rows.csv");
    sim::write_rows_csv(rows, rep);
    auto summary = open("summary.csv");
    sim::write_summary_csv(summary, rep);
    open("report.json") << sim::to_json(rep).dump(2) << '\n';
    sim::write_summary_csv(out, rep);
    return kOk;
}

/**
 * Compare path-derived restorations with the brute-force minimiser on the
 * input. Without explicit lambdas a grid spanning (0, 1.5 max merge value)
 * is used. Returns kNumericalError when any gap exceeds the tolerance.
 */
inline int cmd_verify(std::istream& in, std::ostream& out, const VerifyOptions& opt) {
    const auto ws = detail::load_signal(in);
    const auto path = solve_path(ws);
    auto lambdas = opt.lambdas;
    if (lambdas.empty()) {
        double top = 0.0;
        for (double v : path.lambda) top = std::max(top, v);
        if (top == 0.0) top = 1.0;
        for (std::size_t k = 1; k <= opt.grid; ++k)
            lambdas.push_back(1.5 * top * static_cast<double>(k) / static_cast<double>(opt.grid));
    }
    double worst = 0.0;
    out << "lambda,gap\n";
    for (double lam : lambdas) {
        const auto u = expand(reconstruct(ws, path, lam));
        const auto v = oracle::oracle_tv(ws, lam);
        double gap = 0.0;
        for (std::size_t i = 0; i < u.size(); ++i) gap = std::max(gap, std::abs(u[i] - v[i]));
        worst = std::max(worst, gap);
        out << io::csv_number(lam) << ',' << io::csv_number(gap) << '\n';
    }
    out << "max_gap," << io::csv_number(worst) << '\n';
    return worst <= opt.tolerance ? kOk : kNumericalError;
}

}  // namespace tvpath::cli
