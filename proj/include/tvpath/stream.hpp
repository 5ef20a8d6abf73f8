#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iterator>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tvpath/lambda_select.hpp"
#include "tvpath/path_solver.hpp"
#include "tvpath/restoration.hpp"
#include "tvpath/signal.hpp"

namespace tvpath {

enum class LambdaHatPolicy { ours, twice_ours, fixed };

/// How the cutting point follows the selected weight between pushes.
struct LambdaHatRule {
    LambdaHatPolicy policy = LambdaHatPolicy::ours;
    double fixed_value = 0.0;

    /// Accepts "ours", "2ours" or "fixed:X" with X > 0.
    static LambdaHatRule parse(std::string_view text) {
        if (text == "ours") return {};
        if (text == "2ours") return {LambdaHatPolicy::twice_ours, 0.0};
        if (text.rfind("fixed:", 0) == 0) {
            const std::string number(text.substr(6));
            std::size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(number, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used == 0 || used != number.size() || !(v > 0.0) || !std::isfinite(v))
                throw input_error("lambda-hat policy: fixed value must be a positive number, got '" + number + "'");
            return {LambdaHatPolicy::fixed, v};
        }
        throw input_error("unknown lambda-hat policy '" + std::string(text) + "' (expected ours, 2ours or fixed:X)");
    }
};

inline constexpr std::size_t kStreamBootstrap = 10;

inline double eps_lambda_for(double lambda_hat) { return std::max(1e-9, 1e-9 * lambda_hat); }

/**
 * Samples of a non-isolated suffix preceded by one unit-weight anchor.
 * The anchor sits (lambda_hat + eps) / 2 below or above the level of the
 * first suffix segment, on the side of the true left neighbour, so that it
 * only fuses with the suffix above lambda_hat.
 */
struct VirtualSegment {
    std::vector<double> y_plus;
    std::vector<double> tau_plus;
};

inline VirtualSegment make_virtual_segment(double first_level, int left_sign, double lambda_hat, double eps,
                                           std::span<const double> y, std::span<const double> tau) {
    VirtualSegment v;
    v.y_plus.reserve(y.size() + 1);
    v.tau_plus.reserve(y.size() + 1);
    v.y_plus.push_back(first_level - left_sign * (lambda_hat + eps) / 2.0);
    v.tau_plus.push_back(1.0);
    v.y_plus.insert(v.y_plus.end(), y.begin(), y.end());
    v.tau_plus.insert(v.tau_plus.end(), tau.begin(), tau.end());
    return v;
}

/**
 * First sample of the part of the signal that a new sample can move, given
 * the restoration at the cutting point: the start of the last segment j
 * with sign(v_{j-1} - v_j) == sign(v_K - y_new). Returns 0 when no such
 * segment exists. A new sample exactly at the last level only touches the
 * last segment. Indices are 0-based.
 */
inline std::size_t find_non_isolated_start(const Restoration& r, double y_new) {
    const std::size_t k = r.K();
    if (k == 0) return 0;
    const int target = sign_of(r.levels[k - 1] - y_new);
    if (target == 0) return r.bounds[k - 1];
    for (std::size_t j = k - 1; j >= 1; --j)
        if (sign_of(r.levels[j - 1] - r.levels[j]) == target) return r.bounds[j];
    return 0;
}

/// What the last push did; mostly for tests and timing reports.
struct PushStats {
    bool incremental = false;
    std::size_t m = 0;
    std::size_t suffix_length = 0;
    std::size_t coarse_length = 0;
};

struct StreamOptions {
    LambdaHatRule rule;
    std::size_t n_min = kStreamBootstrap;
    /// Ratio for the log-scale differences; automatic when empty.
    std::optional<double> q;
};

/**
 * Online solver state for one channel. ws holds the collapsed signal so far
 * and path always describes it; order lists the junctions of path sorted by
 * merge weight so the g ladder is rebuilt in linear time.
 */
struct StreamState {
    WeightedSignal ws;
    PathResult path;
    double lambda_hat = 0.0;
    double eps_lambda = 1e-9;
    StreamOptions options;
    std::vector<LadderEntry> order;
    GLadder ladder;
    std::optional<SelectionReport> selection;
    PushStats last;
    double last_t = 0.0;

    StreamState() = default;
    explicit StreamState(StreamOptions opt) : options(opt) {
        if (options.rule.policy == LambdaHatPolicy::fixed) lambda_hat = options.rule.fixed_value;
    }

    std::size_t size() const noexcept { return ws.original_size(); }
};

namespace detail {

struct SegmentSpan {
    std::size_t start;
    double mean;
    double weight;
};

// Segment at lambda that ends just before sample `end`.
inline SegmentSpan segment_ending_at(const WeightedSignal& ws, const PathResult& path, std::size_t end,
                                     double lambda) {
    double sum = 0.0, weight = 0.0;
    std::size_t i = end;
    do {
        --i;
        sum += ws.tau[i] * ws.y[i];
        weight += ws.tau[i];
    } while (i > 0 && !(path.lambda[i - 1] > lambda));
    return {i, sum / weight, weight};
}

struct TailCut {
    bool found = false;
    std::size_t m = 0;
    double level = 0.0;
    int left_sign = 0;
};

// Same rule as find_non_isolated_start, scanning only as far back as needed.
// Only the first `end` samples of ws are considered.
inline TailCut locate_non_isolated(const WeightedSignal& ws, const PathResult& path, std::size_t end, double lambda,
                                   double y_new) {
    TailCut cut;
    SegmentSpan cur = segment_ending_at(ws, path, end, lambda);
    if (cur.start == 0) return cut;
    SegmentSpan prev = segment_ending_at(ws, path, cur.start, lambda);
    int right_sign = 0;
    int left_sign = sign_of(cur.mean - prev.mean);
    const double v_last = cur.mean + lambda * (right_sign - left_sign) / (2.0 * cur.weight);
    const int target = sign_of(v_last - y_new);
    for (;;) {
        if (target == 0 || -left_sign == target) {
            cut.found = true;
            cut.m = cur.start;
            cut.left_sign = left_sign;
            cut.level = cur.mean + lambda * (right_sign - left_sign) / (2.0 * cur.weight);
            return cut;
        }
        if (prev.start == 0) return cut;
        right_sign = left_sign;
        cur = prev;
        prev = segment_ending_at(ws, path, cur.start, lambda);
        left_sign = sign_of(cur.mean - prev.mean);
    }
}

inline bool entry_before(const LadderEntry& a, const LadderEntry& b) noexcept {
    return a.lambda < b.lambda || (a.lambda == b.lambda && a.junction < b.junction);
}

inline void merge_into(std::vector<LadderEntry>& into, std::vector<LadderEntry>& extra) {
    sort_entries(extra);
    const auto mid = static_cast<std::ptrdiff_t>(into.size());
    into.insert(into.end(), extra.begin(), extra.end());
    std::inplace_merge(into.begin(), into.begin() + mid, into.end(), entry_before);
}

inline void append_sample(StreamState& s, double t, double y) {
    auto& ws = s.ws;
    if (ws.empty()) {
        ws.t.push_back(t);
        ws.y.push_back(y);
        ws.tau.push_back(1.0);
        ws.index_map = {0, 1};
        return;
    }
    const double gap = t - s.last_t;
    if (ws.original_size() == 1) ws.tau[0] = gap;
    if (y == ws.y.back()) {
        ws.tau.back() += gap;
        ++ws.index_map.back();
        return;
    }
    ws.t.push_back(t);
    ws.y.push_back(y);
    ws.tau.push_back(gap);
    ws.index_map.push_back(ws.index_map.back() + 1);
}

inline void recompute_offline(StreamState& s) {
    s.path = solve_path(s.ws);
    s.order = sorted_entries(s.path);
    s.last = {false, 0, s.ws.size(), 0};
}

// Incremental update for a new distinct sample already appended to s.ws.
// Returns false when a degenerate configuration requires the offline solve.
inline bool push_incremental(StreamState& s) {
    const auto& ws = s.ws;
    const std::size_t n_new = ws.size();
    const std::size_t n_old = n_new - 1;
    const double lam = s.lambda_hat;
    const double y_new = ws.y.back();
    const PathResult& old = s.path;

    // The scan starts at n_old, so the appended sample is never read.
    const TailCut cut = locate_non_isolated(ws, old, n_old, lam, y_new);
    if (!cut.found) return false;
    const std::size_t m = cut.m;

    // Part 2: the non-isolated suffix behind its anchor.
    const auto virt = make_virtual_segment(cut.level, cut.left_sign, lam, s.eps_lambda,
                                           std::span<const double>(ws.y).subspan(m),
                                           std::span<const double>(ws.tau).subspan(m));
    if (virt.y_plus[0] == virt.y_plus[1]) return false;
    const PathResult pa = PathSolver(virt.y_plus, virt.tau_plus).run();
    if (!(pa.lambda[0] > lam)) return false;

    // Junction i < m keeps its old value, later ones come from the suffix solve.
    const auto temp = [&](std::size_t i) { return i < m ? old.lambda[i] : pa.lambda[i - m + 1]; };

    // Part 1: segment means of the new restoration at lambda_hat.
    std::vector<double> means, weights;
    std::vector<std::size_t> cuts;
    double sum = 0.0, weight = 0.0;
    for (std::size_t i = 0; i < n_new; ++i) {
        sum += ws.tau[i] * ws.y[i];
        weight += ws.tau[i];
        if (i + 1 == n_new || temp(i) > lam) {
            means.push_back(sum / weight);
            weights.push_back(weight);
            if (i + 1 < n_new) cuts.push_back(i);
            sum = weight = 0.0;
        }
    }
    for (std::size_t k = 1; k < means.size(); ++k)
        if (means[k] == means[k - 1]) return false;
    const PathResult pb = PathSolver(means, weights).run();

    // Nothing has been modified so far, so every early return above leaves the state intact.
    PathResult& next = s.path;
    next.n = n_new;
    next.lambda.resize(n_new - 1);
    next.dg.resize(n_new - 1);
    std::vector<LadderEntry> suffix, coarse;
    for (std::size_t i = m; i + 1 < n_new; ++i) {
        next.lambda[i] = pa.lambda[i - m + 1];
        next.dg[i] = pa.dg[i - m + 1];
        if (next.lambda[i] <= lam) suffix.push_back({next.lambda[i], next.dg[i], i});
    }
    for (std::size_t k = 0; k < cuts.size(); ++k) {
        next.lambda[cuts[k]] = pb.lambda[k];
        next.dg[cuts[k]] = pb.dg[k];
        coarse.push_back({pb.lambda[k], pb.dg[k], cuts[k]});
    }

    std::erase_if(s.order, [&](const LadderEntry& e) { return e.lambda > lam || e.junction >= m; });
    merge_into(s.order, suffix);
    merge_into(s.order, coarse);

    s.last = {true, m, n_new - m, means.size()};
    return true;
}

}  // namespace detail

/// Level of the last segment at lambda, from the tail of the signal only.
inline double last_level(const WeightedSignal& ws, const PathResult& path, double lambda) {
    const auto cur = detail::segment_ending_at(ws, path, ws.size(), lambda);
    if (cur.start == 0) return cur.mean;
    const auto prev = detail::segment_ending_at(ws, path, cur.start, lambda);
    return cur.mean - lambda * sign_of(cur.mean - prev.mean) / (2.0 * cur.weight);
}

/// Recompute the selection from the current ladder and move the cutting point.
inline double update_lambda_hat(StreamState& s) {
    s.ladder = build_g_ladder_sorted(s.order);
    if (s.ladder.size() == 0) {
        s.selection.reset();
    } else {
        s.selection = select_lambda(s.ladder, s.options.q);
    }
    switch (s.options.rule.policy) {
        case LambdaHatPolicy::fixed: s.lambda_hat = s.options.rule.fixed_value; break;
        case LambdaHatPolicy::ours:
            if (s.selection) s.lambda_hat = s.selection->lambda_ours;
            break;
        case LambdaHatPolicy::twice_ours:
            if (s.selection) s.lambda_hat = 2.0 * s.selection->lambda_ours;
            break;
    }
    s.eps_lambda = eps_lambda_for(s.lambda_hat);
    return s.lambda_hat;
}

/**
 * Add one sample and bring the path up to date. Below the bootstrap size,
 * after a repeated value or whenever the cutting point is not usable the
 * path is recomputed offline; otherwise only the non-isolated suffix and the
 * coarse segment sequence at the cutting point are solved again.
 */
inline void push_sample(StreamState& s, double t, double y) {
    if (!std::isfinite(t) || !std::isfinite(y))
        throw input_error("non-finite sample at index " + std::to_string(s.size()));
    if (!s.ws.empty() && !(t > s.last_t))
        throw input_error("time not strictly increasing at index " + std::to_string(s.size()));
    const std::size_t before = s.ws.size();
    detail::append_sample(s, t, y);
    s.last_t = t;

    const bool grew = s.ws.size() > before;
    const bool try_incremental =
        grew && before >= 2 && s.ws.original_size() >= s.options.n_min && s.lambda_hat > 0.0;
    if (!try_incremental || !detail::push_incremental(s)) detail::recompute_offline(s);
    update_lambda_hat(s);
}

/// One output row of the streaming protocol.
struct StreamReport {
    std::size_t n = 0;
    double lambda_ours = 0.0;
    std::size_t K = 0;
    double last_level = 0.0;
};

inline StreamReport stream_report(const StreamState& s) {
    StreamReport r;
    r.n = s.size();
    if (s.ws.empty()) return r;
    r.lambda_ours = s.selection ? s.selection->lambda_ours : 0.0;
    const auto above = std::upper_bound(s.order.begin(), s.order.end(), r.lambda_ours,
                                        [](double v, const LadderEntry& e) { return v < e.lambda; });
    r.K = 1 + static_cast<std::size_t>(s.order.end() - above);
    r.last_level = last_level(s.ws, s.path, r.lambda_ours);
    return r;
}

}  // namespace tvpath
