#pragma once

// Brute-force reference minimiser used to validate the path solver. Slow by
// design; keep it out of production code paths.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "tvpath/signal.hpp"

namespace tvpath::oracle {

struct OracleOptions {
    double tol = 1e-12;
    /// Sweep cap is max_sweeps_per_sample * n.
    std::uint64_t max_sweeps_per_sample = 1'000'000;
};

/**
 * Minimise sum tau_i (y_i - u_i)^2 + lambda * sum |u_{i+1} - u_i| through
 * its dual: u = y - D^T p / (2 tau) with p in [-lambda, lambda]^{n-1}.
 * Cyclic coordinate descent; each coordinate step is an exact clip.
 */
inline std::vector<double> oracle_tv(const WeightedSignal& ws, double lambda, OracleOptions opt = {}) {
    if (!(lambda >= 0.0)) throw input_error("oracle_tv: lambda must be non-negative");
    if (!(opt.tol > 0.0)) throw input_error("oracle_tv: tol must be positive");
    const std::size_t n = ws.size();
    const auto& y = ws.y;
    const auto& tau = ws.tau;
    if (n < 2 || lambda == 0.0) return y;

    const std::size_t m = n - 1;
    std::vector<double> p(m, 0.0);
    std::vector<double> inv2tau(n);
    for (std::size_t i = 0; i < n; ++i) inv2tau[i] = 0.5 / tau[i];

    const std::uint64_t cap = opt.max_sweeps_per_sample * n;
    bool converged = false;
    for (std::uint64_t sweep = 0; sweep < cap; ++sweep) {
        double change = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const double a = inv2tau[j];
            const double b = inv2tau[j + 1];
            const double left = j > 0 ? p[j - 1] : 0.0;
            const double right = j + 1 < m ? p[j + 1] : 0.0;
            const double unconstrained = (a * left + b * right + (y[j + 1] - y[j])) / (a + b);
            const double next = std::clamp(unconstrained, -lambda, lambda);
            change = std::max(change, std::abs(next - p[j]));
            p[j] = next;
        }
        if (change < opt.tol) {
            converged = true;
            break;
        }
    }
    if (!converged) throw numerical_error("oracle_tv: sweep cap reached before convergence");

    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double prev = i > 0 ? p[i - 1] : 0.0;
        const double cur = i < m ? p[i] : 0.0;
        u[i] = y[i] - (prev - cur) * inv2tau[i];
    }
    return u;
}

/// Number of runs of values equal within tol.
inline std::size_t segment_count(const std::vector<double>& u, double tol = 1e-8) {
    if (u.empty()) return 0;
    std::size_t k = 1;
    for (std::size_t i = 1; i < u.size(); ++i)
        if (std::abs(u[i] - u[i - 1]) > tol) ++k;
    return k;
}

/// Smallest weight that fuses the whole signal: max_j |2 sum_{i<=j} tau_i (y_i - mean)|.
inline double full_merge_lambda(const WeightedSignal& ws) {
    double sw = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        sw += ws.tau[i];
        sy += ws.tau[i] * ws.y[i];
    }
    const double mean = sy / sw;
    double acc = 0.0, best = 0.0;
    for (std::size_t i = 0; i + 1 < ws.size(); ++i) {
        acc += 2.0 * ws.tau[i] * (ws.y[i] - mean);
        best = std::max(best, std::abs(acc));
    }
    return best;
}

namespace detail {

inline void bisect_changes(const WeightedSignal& ws, double lo, std::size_t k_lo, double hi, std::size_t k_hi,
                           std::vector<double>& out) {
    if (k_lo == k_hi) return;
    if (hi - lo <= 1e-6 * hi) {
        out.push_back(0.5 * (lo + hi));
        return;
    }
    const double mid = 0.5 * (lo + hi);
    const std::size_t k_mid = segment_count(oracle_tv(ws, mid));
    bisect_changes(ws, lo, k_lo, mid, k_mid, out);
    bisect_changes(ws, mid, k_mid, hi, k_hi, out);
}

}  // namespace detail

/**
 * Approximate distinct breakpoints of the solution path: sweep a geometric
 * grid with grid_density points per decade below the full-merge weight,
 * then bisect every interval where the segment count changes down to a
 * relative width of 1e-6.
 */
inline std::vector<double> oracle_breakpoints(const WeightedSignal& ws, int grid_density = 20) {
    std::vector<double> out;
    if (ws.size() < 2) return out;
    const double top = full_merge_lambda(ws) * 1.01;
    if (!(top > 0.0)) return out;
    const double bottom = top * 1e-8;
    const int steps = std::max(1, static_cast<int>(std::ceil(8.0 * grid_density)));
    std::vector<double> grid(steps + 1);
    for (int s = 0; s <= steps; ++s) grid[s] = bottom * std::pow(top / bottom, static_cast<double>(s) / steps);
    std::size_t k_prev = segment_count(oracle_tv(ws, grid[0]));
    for (int s = 1; s <= steps; ++s) {
        const std::size_t k = segment_count(oracle_tv(ws, grid[s]));
        detail::bisect_changes(ws, grid[s - 1], k_prev, grid[s], k, out);
        k_prev = k;
    }
    return out;
}

}  // namespace tvpath::oracle
