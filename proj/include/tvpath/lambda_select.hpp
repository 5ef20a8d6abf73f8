#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "tvpath/path_solver.hpp"

namespace tvpath {

/**
 * Step function g(lambda): breakpoints are the strictly increasing weights
 * at which the extremum count drops. g_values has one more entry than
 * breakpoints; g_values[k] holds g on [breakpoints[k-1], breakpoints[k]),
 * with g_values[0] the count just above zero and g_values.back() == 1.
 */
struct GLadder {
    std::vector<double> breakpoints;
    std::vector<long> g_values{1};

    std::size_t size() const noexcept { return breakpoints.size(); }

    long g(double lambda) const {
        const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), lambda);
        return g_values[static_cast<std::size_t>(it - breakpoints.begin())];
    }
};

/// Numerical log-scale derivatives of g at every ladder breakpoint.
struct GDerivatives {
    double q = 0.0;
    std::vector<long> d_plus;
    std::vector<long> d_minus;
    std::vector<long> d2;
    std::vector<long> d4;
};

struct SelectionReport {
    double lambda_ours = 0.0;
    double lambda_trans = 0.0;
    std::size_t index_ours = 0;
    std::size_t index_trans = 0;
    GDerivatives derivatives;
};

inline constexpr double kDefaultLog10Q = 0.75;
inline constexpr double kMinLog10Q = 0.5;
inline constexpr double kMaxLog10Q = 1.0;

/// One junction of a path in merge-weight order.
struct LadderEntry {
    double lambda;
    int dg;
    std::size_t junction;
};

inline void sort_entries(std::vector<LadderEntry>& entries) {
    std::sort(entries.begin(), entries.end(), [](const LadderEntry& a, const LadderEntry& b) {
        return a.lambda < b.lambda || (a.lambda == b.lambda && a.junction < b.junction);
    });
}

inline std::vector<LadderEntry> sorted_entries(const PathResult& path) {
    std::vector<LadderEntry> entries(path.lambda.size());
    for (std::size_t i = 0; i < entries.size(); ++i) entries[i] = {path.lambda[i], path.dg[i], i};
    sort_entries(entries);
    return entries;
}

/// Ladder from junction entries already sorted by merge weight.
inline GLadder build_g_ladder_sorted(std::span<const LadderEntry> sorted) {
    GLadder ladder;
    std::vector<long> drops;
    for (std::size_t i = 0; i < sorted.size();) {
        std::size_t j = i;
        long d = 0;
        while (j < sorted.size() && sorted[j].lambda == sorted[i].lambda) d += sorted[j++].dg;
        if (d != 0) {
            ladder.breakpoints.push_back(sorted[i].lambda);
            drops.push_back(d);
        }
        i = j;
    }
    ladder.g_values.assign(drops.size() + 1, 1);
    for (std::size_t k = drops.size(); k-- > 0;) ladder.g_values[k] = ladder.g_values[k + 1] - drops[k];
    return ladder;
}

inline GLadder build_g_ladder(const PathResult& path) { return build_g_ladder_sorted(sorted_entries(path)); }

/// Left and right log-scale differences of g at an arbitrary weight.
struct GSlopes {
    long d_plus;
    long d_minus;
};

inline GSlopes g_slopes_at(const GLadder& ladder, double lambda, double q) {
    if (!(q > 1.0)) throw input_error("g_slopes_at: q must exceed 1");
    const long here = ladder.g(lambda);
    return {ladder.g(q * lambda) - here, here - ladder.g(lambda / q)};
}

inline GDerivatives discrete_derivatives(const GLadder& ladder, double q) {
    if (!(q > 1.0)) throw input_error("discrete_derivatives: q must exceed 1");
    GDerivatives d;
    d.q = q;
    const auto& bp = ladder.breakpoints;
    const std::size_t b = bp.size();
    d.d_plus.resize(b);
    d.d_minus.resize(b);
    d.d2.resize(b);
    // q*lambda and lambda/q grow with lambda, so both lookups are monotone sweeps
    // yielding the same index as upper_bound in GLadder::g.
    std::size_t up = 0, down = 0;
    for (std::size_t i = 0; i < b; ++i) {
        const double lam = bp[i];
        const double hi = q * lam, lo = lam / q;
        while (up < b && !(hi < bp[up])) ++up;
        while (down < b && !(lo < bp[down])) ++down;
        const long here = ladder.g_values[i + 1];
        d.d_plus[i] = ladder.g_values[up] - here;
        d.d_minus[i] = here - ladder.g_values[down];
        d.d2[i] = d.d_plus[i] - d.d_minus[i];
    }
    d.d4.resize(b);
    for (std::size_t i = 0; i < b; ++i) {
        const long a1 = d.d2[std::min(i + 1, b - 1)];
        const long a2 = d.d2[std::min(i + 2, b - 1)];
        d.d4[i] = a2 - 2 * a1 + d.d2[i];
    }
    return d;
}

/// q from the longest log-step of g, ignoring its first two steps, clamped
/// to [10^0.5, 10^1]. Falls back to 10^0.75 when no step is left.
inline double auto_q(const GLadder& ladder) {
    const auto& bp = ladder.breakpoints;
    if (bp.size() < 4) return std::pow(10.0, kDefaultLog10Q);
    double widest = 1.0;
    for (std::size_t i = 2; i + 1 < bp.size(); ++i) widest = std::max(widest, bp[i + 1] / bp[i]);
    return std::pow(10.0, std::clamp(std::log10(widest), kMinLog10Q, kMaxLog10Q));
}

/// Transitory point at the largest second difference of g, then the sharpest
/// fourth difference at or beyond it. Ties go to the smaller weight.
inline SelectionReport select_lambda(const GLadder& ladder, std::optional<double> q = std::nullopt) {
    if (ladder.size() == 0) throw input_error("signal too short for selection");
    SelectionReport rep;
    rep.derivatives = discrete_derivatives(ladder, q ? *q : auto_q(ladder));
    const auto& d2 = rep.derivatives.d2;
    const auto& d4 = rep.derivatives.d4;
    std::size_t trans = 0;
    for (std::size_t i = 1; i < d2.size(); ++i)
        if (d2[i] > d2[trans]) trans = i;
    std::size_t ours = trans;
    for (std::size_t i = trans + 1; i < d4.size(); ++i)
        if (d4[i] < d4[ours]) ours = i;
    rep.index_trans = trans;
    rep.index_ours = ours;
    rep.lambda_trans = ladder.breakpoints[trans];
    rep.lambda_ours = ladder.breakpoints[ours];
    return rep;
}

inline SelectionReport select_lambda(const PathResult& path, std::optional<double> q = std::nullopt) {
    return select_lambda(build_g_ladder(path), q);
}

}  // namespace tvpath
