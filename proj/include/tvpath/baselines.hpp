#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "tvpath/path_solver.hpp"
#include "tvpath/restoration.hpp"
#include "tvpath/signal.hpp"

namespace tvpath {

/// Outcome of a reference selector together with what it looked at.
struct SelectorResult {
    double lambda = 0.0;
    std::string method;
    std::vector<double> candidates;
    std::vector<double> criterion;
    std::optional<std::size_t> k_hat;
    double sigma = 0.0;
    bool fallback = false;
    std::vector<std::string> notes;
};

/**
 * One representative weight per distinct restoration: 0, the geometric
 * midpoint of every pair of consecutive distinct merge weights, and the
 * largest merge weight.
 */
inline std::vector<double> default_candidates(const PathResult& path) {
    std::vector<double> bp = path.lambda;
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    std::vector<double> out{0.0};
    for (std::size_t i = 0; i + 1 < bp.size(); ++i) out.push_back(std::sqrt(bp[i] * bp[i + 1]));
    if (!bp.empty()) out.push_back(bp.back());
    return out;
}

/// Sum of squared residuals over the original samples.
inline double residual_sum_squares(const WeightedSignal& ws, const Restoration& r) {
    double rss = 0.0;
    for (std::size_t j = 0; j < r.K(); ++j)
        for (std::size_t i = r.bounds[j]; i < r.bounds[j + 1]; ++i) {
            const double d = ws.y[i] - r.levels[j];
            rss += static_cast<double>(ws.run_length(i)) * d * d;
        }
    return rss;
}

/// True when every original sample carries the same weight.
inline bool has_uniform_weights(const WeightedSignal& ws) {
    const double unit = ws.tau[0] / static_cast<double>(ws.run_length(0));
    for (std::size_t i = 1; i < ws.size(); ++i)
        if (std::abs(ws.tau[i] / static_cast<double>(ws.run_length(i)) - unit) > 1e-12 * unit) return false;
    return true;
}

/// SURE(lambda) = |y - u|^2 + 2 sigma^2 K - n sigma^2, with plain (unweighted) residuals.
inline double sure_value(const WeightedSignal& ws, const PathResult& path, double sigma, double lambda) {
    const auto r = reconstruct(ws, path, lambda);
    const double n = static_cast<double>(ws.original_size());
    const double s2 = sigma * sigma;
    return residual_sum_squares(ws, r) + 2.0 * s2 * static_cast<double>(r.K()) - n * s2;
}

inline SelectorResult sure_select(const WeightedSignal& ws, const PathResult& path, double sigma,
                                  std::vector<double> candidates = {}) {
    if (!(sigma > 0.0)) throw input_error("sure_select: sigma must be positive");
    if (candidates.empty()) candidates = default_candidates(path);
    SelectorResult res;
    res.method = "sure";
    res.sigma = sigma;
    res.candidates = std::move(candidates);
    res.criterion.reserve(res.candidates.size());
    std::size_t best = 0;
    for (std::size_t i = 0; i < res.candidates.size(); ++i) {
        res.criterion.push_back(sure_value(ws, path, sigma, res.candidates[i]));
        const double c = res.criterion[i], b = res.criterion[best];
        if (c < b || (c == b && res.candidates[i] < res.candidates[best])) best = i;
    }
    res.lambda = res.candidates[best];
    if (!has_uniform_weights(ws)) res.notes.push_back("non-uniform sampling: residuals are unweighted");
    return res;
}

/// (sigma / 2) sqrt(m ln ln m), natural logarithms.
inline double universal_threshold(double sigma, double m) { return 0.5 * sigma * std::sqrt(m * std::log(std::log(m))); }

/**
 * Scale of the AUT rule. The rule is stated for the fidelity term
 * (1/2)||y - u||^2, while the objective here has no 1/2, so the same
 * restoration needs twice the lambda. `half_fidelity` applies that factor to
 * both evaluations; `literal` plugs the thresholds in unchanged.
 */
enum class AutScale { half_fidelity, literal };

inline SelectorResult aut_select(const WeightedSignal& ws, const PathResult& path, double sigma,
                                 AutScale scale = AutScale::half_fidelity) {
    if (!(sigma > 0.0)) throw input_error("aut_select: sigma must be positive");
    const double n = static_cast<double>(ws.original_size());
    if (n < 3) throw input_error("aut_select: need at least 3 samples");
    const double factor = scale == AutScale::half_fidelity ? 2.0 : 1.0;
    SelectorResult res;
    res.method = "aut";
    res.sigma = sigma;
    const double lambda_n = factor * universal_threshold(sigma, n);
    const std::size_t k_hat = reconstruct(ws, path, lambda_n).K();
    res.k_hat = k_hat;
    res.candidates = {lambda_n};
    const double ratio = n / static_cast<double>(k_hat);
    if (ratio <= std::exp(1.0)) {
        res.lambda = lambda_n;
        res.fallback = true;
        res.notes.push_back("n/K_hat <= e: kept the universal threshold");
    } else {
        res.lambda = factor * universal_threshold(sigma, ratio);
    }
    if (scale == AutScale::literal) res.notes.push_back("literal threshold scale");
    return res;
}

/// Noise level from the median absolute first difference.
inline double estimate_sigma(std::span<const double> y) {
    if (y.size() < 2) throw input_error("estimate_sigma: need at least 2 samples");
    std::vector<double> d(y.size() - 1);
    for (std::size_t i = 0; i + 1 < y.size(); ++i) d[i] = std::abs(y[i + 1] - y[i]);
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    double med = d[mid];
    if (d.size() % 2 == 0) med = 0.5 * (med + *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid)));
    return med / (0.6745 * std::sqrt(2.0));
}

/// Mean squared error between the clean signal and a restoration.
inline double restoration_error(std::span<const double> clean, std::span<const double> u) {
    if (clean.size() != u.size()) throw input_error("restoration_error: length mismatch");
    if (clean.empty()) return 0.0;
    double s = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) s += (clean[i] - u[i]) * (clean[i] - u[i]);
    return s / static_cast<double>(clean.size());
}

/// d(lambda_1, lambda_2) = R(lambda_1) - R(lambda_2) for any error functional R.
template <class ErrorFn>
double compare_selectors(double lambda_1, double lambda_2, ErrorFn&& risk) {
    return risk(lambda_1) - risk(lambda_2);
}

/// Error of the restoration at lambda against a clean signal on the original samples.
inline double error_at(const WeightedSignal& ws, const PathResult& path, std::span<const double> clean,
                       double lambda) {
    return restoration_error(clean, expand_original(ws, reconstruct(ws, path, lambda)));
}

struct OptimalLambda {
    double lambda = 0.0;
    double error = 0.0;
};

/**
 * Exact minimiser of the restoration error over lambda >= 0. Between two
 * consecutive merge weights every level is affine in lambda, so the error is
 * a quadratic there and its minimum on the closed interval is explicit.
 */
inline OptimalLambda optimal_lambda(const WeightedSignal& ws, const PathResult& path, std::span<const double> clean) {
    if (clean.size() != ws.original_size()) throw input_error("optimal_lambda: length mismatch");
    std::vector<double> bp = path.lambda;
    std::sort(bp.begin(), bp.end());
    bp.erase(std::unique(bp.begin(), bp.end()), bp.end());
    std::vector<double> edges{0.0};
    edges.insert(edges.end(), bp.begin(), bp.end());

    const double n = static_cast<double>(clean.size());
    OptimalLambda best{0.0, error_at(ws, path, clean, 0.0)};
    for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
        const double lo = edges[k], hi = edges[k + 1];
        const double mid = 0.5 * (lo + hi);
        const auto r = reconstruct(ws, path, mid);
        const auto beta = compute_beta(r.signs, r.seg_weights);
        // error(lambda) = (c0 - 2 c1 (lambda - mid) + c2 (lambda - mid)^2) / n
        double c0 = 0.0, c1 = 0.0, c2 = 0.0;
        for (std::size_t j = 0; j < r.K(); ++j)
            for (std::size_t i = ws.index_map[r.bounds[j]]; i < ws.index_map[r.bounds[j + 1]]; ++i) {
                const double e = clean[i] - r.levels[j];
                c0 += e * e;
                c1 += e * beta[j];
                c2 += beta[j] * beta[j];
            }
        double x = c2 > 0.0 ? c1 / c2 : 0.0;
        x = std::clamp(x, lo - mid, hi - mid);
        const double err = (c0 - 2.0 * c1 * x + c2 * x * x) / n;
        if (err < best.error) best = {mid + x, err};
    }
    if (!bp.empty()) {
        const double err = error_at(ws, path, clean, bp.back());
        if (err < best.error) best = {bp.back(), err};
    }
    return best;
}

namespace detail {

// Piecewise-linear interpolation through (xs, vs), constant beyond the ends.
inline double interpolate(std::span<const double> xs, std::span<const double> vs, double x) {
    if (x <= xs.front()) return vs.front();
    if (x >= xs.back()) return vs.back();
    const auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
    return vs[lo] + w * (vs[hi] - vs[lo]);
}

}  // namespace detail

/// Seeded partition of 0..n-1 into k folds whose sizes differ by at most one.
inline std::vector<std::vector<std::size_t>> make_folds(std::size_t n, std::size_t k, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::size_t i = 0; i < n; ++i) folds[i % k].push_back(perm[i]);
    for (auto& f : folds) std::sort(f.begin(), f.end());
    return folds;
}

/**
 * K-fold cross-validation over candidate weights. Each fold is held out in
 * turn; the rest is restored with weights recomputed from its own time grid
 * and the held-out samples are predicted by linear interpolation between
 * the retained times. The summed per-fold mean squared errors are minimised.
 */
inline SelectorResult cv_select(std::span<const double> t, std::span<const double> y, std::size_t k_folds,
                                std::vector<double> candidates, std::uint64_t seed) {
    const std::size_t n = y.size();
    if (t.size() != n) throw input_error("cv_select: length mismatch");
    if (k_folds < 2) throw input_error("cv_select: need at least 2 folds");
    if (n < 2 * k_folds) throw input_error("cv_select: need at least 2 samples per fold");
    if (candidates.empty()) throw input_error("cv_select: no candidates");

    SelectorResult res;
    res.method = "cv";
    res.candidates = std::move(candidates);
    res.criterion.assign(res.candidates.size(), 0.0);

    std::vector<bool> held(n);
    for (const auto& fold : make_folds(n, k_folds, seed)) {
        std::fill(held.begin(), held.end(), false);
        for (std::size_t i : fold) held[i] = true;
        std::vector<double> t_fit, y_fit;
        for (std::size_t i = 0; i < n; ++i)
            if (!held[i]) {
                t_fit.push_back(t[i]);
                y_fit.push_back(y[i]);
            }
        const auto ws = collapse_constant_pieces(build_weighted_signal(t_fit, y_fit));
        const auto path = solve_path(ws);
        for (std::size_t c = 0; c < res.candidates.size(); ++c) {
            const auto u = expand_original(ws, reconstruct(ws, path, res.candidates[c]));
            double e = 0.0;
            for (std::size_t i : fold) {
                const double d = y[i] - detail::interpolate(t_fit, u, t[i]);
                e += d * d;
            }
            res.criterion[c] += e / static_cast<double>(fold.size());
        }
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < res.candidates.size(); ++c) {
        const double v = res.criterion[c], b = res.criterion[best];
        if (v < b || (v == b && res.candidates[c] < res.candidates[best])) best = c;
    }
    res.lambda = res.candidates[best];
    return res;
}

inline SelectorResult cv_select(const WeightedSignal& original, std::size_t k_folds, std::vector<double> candidates,
                                std::uint64_t seed) {
    if (original.collapsed()) throw input_error("cv_select: pass the uncollapsed signal");
    return cv_select(original.t, original.y, k_folds, std::move(candidates), seed);
}

}  // namespace tvpath
