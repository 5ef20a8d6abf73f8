#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "json.hpp"
#include "tvpath/baselines.hpp"
#include "tvpath/lambda_select.hpp"
#include "tvpath/path_solver.hpp"
#include "tvpath/restoration.hpp"
#include "tvpath/signal.hpp"

namespace tvpath::io {

using nlohmann::json;

/// Raw (uncollapsed) samples read from text.
struct Samples {
    std::vector<double> t;
    std::vector<double> y;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline char detect_separator(std::string_view line) {
    for (char c : {',', ';', '\t'})
        if (line.find(c) != std::string_view::npos) return c;
    return ' ';
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    if (sep == ' ') {
        std::size_t i = 0;
        while (i < line.size()) {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
            if (i == line.size()) break;
            std::size_t j = i;
            while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
            out.push_back(line.substr(i, j - i));
            i = j;
        }
        return out;
    }
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

/**
 * Parse one data line "t<sep>y" (or a lone "y"). Returns nothing for blank
 * and comment lines. Throws input_error naming the line on malformed rows
 * and on NaN or infinite values.
 */
inline std::optional<std::pair<std::optional<double>, double>> parse_sample_line(std::string_view raw,
                                                                               std::size_t line_no) {
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') return std::nullopt;
    const auto fields = detail::split(line, detail::detect_separator(line));
    const auto where = " at line " + std::to_string(line_no);
    if (fields.empty() || fields.size() > 3) throw input_error("expected 't,y' or 'y'" + where);
    std::vector<double> vals;
    for (auto f : std::span(fields).first(std::min<std::size_t>(fields.size(), 2))) {
        const auto v = detail::parse_double(f);
        if (!v) throw input_error("cannot parse number '" + std::string(f) + "'" + where);
        if (!std::isfinite(*v)) throw input_error("non-finite value" + where);
        vals.push_back(*v);
    }
    if (vals.size() == 1) return std::make_pair(std::optional<double>{}, vals[0]);
    return std::make_pair(std::optional<double>{vals[0]}, vals[1]);
}

inline bool looks_like_header(std::string_view raw) {
    const auto line = detail::trim(raw);
    if (line.empty() || line.front() == '#') return false;
    const auto fields = detail::split(line, detail::detect_separator(line));
    return !fields.empty() && !detail::parse_double(fields.front());
}

/**
 * Read a CSV/TSV/whitespace table with columns t,y (a third column is
 * ignored) or a single y column, in which case t = 0, 1, 2, ... The first
 * line may be a header. All rows must have the same shape.
 */
inline Samples read_samples(std::istream& in) {
    Samples s;
    std::string line;
    std::size_t line_no = 0;
    std::optional<bool> has_time;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no == 1 && looks_like_header(line)) continue;
        const auto row = parse_sample_line(line, line_no);
        if (!row) continue;
        const bool timed = row->first.has_value();
        if (has_time && *has_time != timed)
            throw input_error("inconsistent column count at line " + std::to_string(line_no));
        has_time = timed;
        s.t.push_back(timed ? *row->first : static_cast<double>(s.y.size()));
        s.y.push_back(row->second);
    }
    return s;
}

/// Fixed 9-significant-digit rendering used for every CSV number.
inline std::string csv_number(double v) {
    std::ostringstream os;
    os << std::setprecision(9) << v;
    return os.str();
}

inline void write_denoised_csv(std::ostream& out, std::span<const double> t, std::span<const double> y,
                               std::span<const double> u) {
    out << "t,y,u\n";
    for (std::size_t i = 0; i < y.size(); ++i)
        out << csv_number(t[i]) << ',' << csv_number(y[i]) << ',' << csv_number(u[i]) << '\n';
}

inline json to_json(const PathResult& p) { return json{{"n", p.n}, {"lambda", p.lambda}, {"dg", p.dg}}; }

inline PathResult path_from_json(const json& j) {
    try {
        PathResult p;
        p.n = j.at("n").get<std::size_t>();
        p.lambda = j.at("lambda").get<std::vector<double>>();
        p.dg = j.at("dg").get<std::vector<int>>();
        if (p.lambda.size() != p.dg.size() || (p.n > 0 && p.lambda.size() + 1 != p.n))
            throw input_error("path JSON: array sizes do not match n");
        return p;
    } catch (const json::exception& e) {
        throw input_error(std::string("path JSON: ") + e.what());
    }
}

/// Segment summary on the original sample indexing: breaks are the last
/// original index of every segment but the final one.
inline json to_json(const WeightedSignal& ws, const Restoration& r) {
    std::vector<std::size_t> breaks;
    for (std::size_t j = 1; j < r.K(); ++j) breaks.push_back(ws.index_map[r.bounds[j]] - 1);
    return json{{"breaks", breaks}, {"levels", r.levels}, {"lambda", r.lambda}};
}

inline json to_json(const SelectionReport& s) {
    const auto& d = s.derivatives;
    return json{{"lambda_ours", s.lambda_ours},
                {"lambda_trans", s.lambda_trans},
                {"index_ours", s.index_ours},
                {"index_trans", s.index_trans},
                {"q", d.q},
                {"d_plus", d.d_plus},
                {"d_minus", d.d_minus},
                {"d2", d.d2},
                {"d4", d.d4}};
}

inline json to_json(const GLadder& l) { return json{{"breakpoints", l.breakpoints}, {"g", l.g_values}}; }

inline json to_json(const SelectorResult& r) {
    json j{{"method", r.method}, {"lambda", r.lambda}, {"sigma", r.sigma}, {"fallback", r.fallback}};
    j["candidates"] = r.candidates;
    j["criterion"] = r.criterion;
    j["k_hat"] = r.k_hat ? json(*r.k_hat) : json(nullptr);
    j["notes"] = r.notes;
    return j;
}

/// Criterion curve as CSV rows "lambda,criterion".
inline void write_criterion_csv(std::ostream& out, const SelectorResult& r) {
    out << "lambda,criterion\n";
    for (std::size_t i = 0; i < r.candidates.size(); ++i)
        out << csv_number(r.candidates[i]) << ',' << csv_number(r.criterion[i]) << '\n';
}

}  // namespace tvpath::io
