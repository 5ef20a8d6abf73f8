#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "tvpath/path_solver.hpp"
#include "tvpath/signal.hpp"

namespace tvpath {

/**
 * Restored signal at a fixed lambda in segment form.
 *
 * Segment j covers samples [bounds[j], bounds[j+1]). signs has K+1 entries,
 * signs[j] = sign(level[j] - level[j-1]) for interior junctions and 0 at
 * both ends.
 */
struct Restoration {
    double lambda = 0.0;
    std::vector<std::size_t> bounds;
    std::vector<double> levels;
    std::vector<double> seg_weights;
    std::vector<double> seg_means;
    std::vector<int> signs;

    std::size_t K() const noexcept { return levels.size(); }
    std::size_t n() const noexcept { return bounds.empty() ? 0 : bounds.back(); }

    /// Last sample index of every segment but the final one.
    std::vector<std::size_t> cut_indices() const {
        std::vector<std::size_t> cuts;
        for (std::size_t j = 1; j + 1 < bounds.size(); ++j) cuts.push_back(bounds[j] - 1);
        return cuts;
    }

    /// Segment containing sample i.
    std::size_t segment_of(std::size_t i) const;
};

inline std::size_t Restoration::segment_of(std::size_t i) const {
    std::size_t lo = 0, hi = K();
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        if (bounds[mid] <= i) lo = mid; else hi = mid;
    }
    return lo;
}

/// Fill levels from segment sums. Shared with the streaming solver.
inline void finish_restoration(Restoration& r) {
    const std::size_t k = r.seg_weights.size();
    r.signs.assign(k + 1, 0);
    for (std::size_t j = 1; j < k; ++j) r.signs[j] = sign_of(r.seg_means[j] - r.seg_means[j - 1]);
    r.levels.resize(k);
    for (std::size_t j = 0; j < k; ++j)
        r.levels[j] = r.seg_means[j] + r.lambda * (r.signs[j + 1] - r.signs[j]) / (2.0 * r.seg_weights[j]);
}

/// Cut at every junction whose merge weight exceeds lambda, then shift each
/// segment mean by lambda times its slope. O(n).
inline Restoration reconstruct(const WeightedSignal& ws, const PathResult& path, double lambda) {
    if (!(lambda >= 0.0)) throw input_error("reconstruct: lambda must be non-negative");
    if (path.n != ws.size()) throw input_error("reconstruct: path does not match signal");
    Restoration r;
    r.lambda = lambda;
    const std::size_t n = ws.size();
    if (n == 0) return r;
    r.bounds.push_back(0);
    double sum = 0.0, weight = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sum += ws.tau[i] * ws.y[i];
        weight += ws.tau[i];
        if (i + 1 == n || path.lambda[i] > lambda) {
            r.bounds.push_back(i + 1);
            r.seg_weights.push_back(weight);
            r.seg_means.push_back(sum / weight);
            sum = weight = 0.0;
        }
    }
    finish_restoration(r);
    return r;
}

/// Per-sample values on the (collapsed) grid of the restoration.
inline std::vector<double> expand(const Restoration& r) {
    std::vector<double> u(r.n());
    for (std::size_t j = 0; j < r.K(); ++j)
        for (std::size_t i = r.bounds[j]; i < r.bounds[j + 1]; ++i) u[i] = r.levels[j];
    return u;
}

/// Per-sample values over the original samples, undoing constant-piece collapsing.
inline std::vector<double> expand_original(const WeightedSignal& ws, const Restoration& r) {
    return expand_to_original(ws, expand(r));
}

/// g(lambda) = 1 - sum of dg over junctions still separated at lambda.
inline std::size_t g_of_lambda(const PathResult& path, double lambda) {
    if (!(lambda >= 0.0)) throw input_error("g_of_lambda: lambda must be non-negative");
    long g = 1;
    for (std::size_t i = 0; i < path.lambda.size(); ++i)
        if (path.lambda[i] - lambda > 0.0) g -= path.dg[i];
    return static_cast<std::size_t>(g);
}

inline double total_variation(const Restoration& r) {
    double tv = 0.0;
    for (std::size_t j = 1; j < r.K(); ++j) tv += std::abs(r.levels[j] - r.levels[j - 1]);
    return tv;
}

/// Value of the weighted objective sum tau (y - u)^2 + lambda * TV(u).
inline double objective(const WeightedSignal& ws, std::span<const double> u, double lambda) {
    double f = 0.0;
    for (std::size_t i = 0; i < ws.size(); ++i) {
        const double r = ws.y[i] - u[i];
        f += ws.tau[i] * r * r;
        if (i > 0) f += lambda * std::abs(u[i] - u[i - 1]);
    }
    return f;
}

}  // namespace tvpath
