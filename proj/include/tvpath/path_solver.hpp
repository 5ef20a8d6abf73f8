#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "tvpath/signal.hpp"

namespace tvpath {

/**
 * Complete solution path of weighted 1D total-variation denoising.
 *
 * Junction i sits between samples i and i+1 (0-based). lambda[i] is the
 * regularization weight at which those two samples end up in the same
 * segment; dg[i] is the change of the extremum count caused by that merge.
 * When several junctions merge at the same weight the change of a connected
 * run of junctions is stored on its leftmost junction and the others hold 0.
 */
struct PathResult {
    std::size_t n = 0;
    std::vector<double> lambda;
    std::vector<int> dg;

    std::size_t junctions() const noexcept { return lambda.size(); }
    double max_lambda() const noexcept {
        return lambda.empty() ? 0.0 : *std::max_element(lambda.begin(), lambda.end());
    }
};

inline int sign_of(double x) noexcept { return (x > 0.0) - (x < 0.0); }

/// Slope of each segment level in lambda: (s_j - s_{j-1}) / (2 T_j), where
/// signs has K+1 entries with signs.front() == signs.back() == 0.
inline std::vector<double> compute_beta(std::span<const int> signs, std::span<const double> weights) {
    if (signs.size() != weights.size() + 1)
        throw input_error("compute_beta: need one more sign than segment weights");
    std::vector<double> beta(weights.size());
    for (std::size_t j = 0; j < weights.size(); ++j)
        beta[j] = static_cast<double>(signs[j + 1] - signs[j]) / (2.0 * weights[j]);
    return beta;
}

/// A segment is a local min/max when its two boundary signs differ. A lone
/// segment (both signs 0) counts as one extremum.
inline bool is_extremum(int sign_left, int sign_right) noexcept {
    return sign_left != sign_right || (sign_left == 0 && sign_right == 0);
}

/**
 * Change of the extremum count when the segments on both sides of a junction
 * merge. s_left and s_right are the signs of the neighbouring junctions (0 at
 * the signal ends), s_mid the sign of the merging junction.
 */
inline int delta_g_for_merge(int s_left, int s_mid, int s_right) {
    if (s_mid == 0) throw std::logic_error("delta_g_for_merge: merging junction has zero sign");
    if (s_left * s_right != 0) return -std::abs(s_left + s_right);
    // The condition column reads s_{j-1} + s_j + s_{j+1}; its magnitude is
    // what separates the two rows once the signs can be negative.
    return std::abs(s_left + s_mid + s_right) < 2 ? -1 : 0;
}

/// Number of local min/max segments of a piecewise-constant level sequence.
inline std::size_t count_extrema(std::span<const double> levels) {
    const std::size_t k = levels.size();
    if (k == 0) return 0;
    std::size_t g = 0;
    int left = 0;
    for (std::size_t j = 0; j < k; ++j) {
        const int right = j + 1 < k ? sign_of(levels[j + 1] - levels[j]) : 0;
        g += is_extremum(left, right) ? 1 : 0;
        left = right;
    }
    return g;
}

namespace detail {

inline constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

struct MergeEvent {
    double eta;
    std::size_t junction;
    std::uint32_t generation;
};

struct LaterMerge {
    bool operator()(const MergeEvent& a, const MergeEvent& b) const noexcept {
        if (a.eta != b.eta) return a.eta > b.eta;
        return a.junction > b.junction;
    }
};

/// Segments are identified by the index of their last sample; the junction
/// of a segment with its right neighbour carries the same identifier.
class PathSolver {
public:
    static constexpr double kTieTolerance = 1e-12;

    PathSolver(std::span<const double> y, std::span<const double> tau)
        : n_(y.size()),
          sum_ty_(n_),
          weight_(tau.begin(), tau.end()),
          beta_(n_),
          left_(n_),
          right_(n_),
          sign_right_(n_),
          generation_(n_, 0) {
        for (std::size_t i = 0; i < n_; ++i) {
            sum_ty_[i] = tau[i] * y[i];
            left_[i] = i == 0 ? npos : i - 1;
            right_[i] = i + 1 < n_ ? i + 1 : npos;
            sign_right_[i] = i + 1 < n_ ? sign_of(y[i + 1] - y[i]) : 0;
        }
        for (std::size_t i = 0; i < n_; ++i) beta_[i] = slope(i);
    }

    PathResult run() {
        PathResult out;
        out.n = n_;
        if (n_ < 2) return out;
        out.lambda.assign(n_ - 1, 0.0);
        out.dg.assign(n_ - 1, 0);

        std::vector<MergeEvent> storage;
        storage.reserve(2 * n_);
        heap_ = Heap(LaterMerge{}, std::move(storage));
        for (std::size_t j = 0; j + 1 < n_; ++j) schedule(j, 0.0);

        std::vector<std::size_t> group;
        std::vector<std::size_t> touched;
        while (!heap_.empty()) {
            if (stale(heap_.top())) {
                heap_.pop();
                continue;
            }
            const double lambda_new = heap_.top().eta;
            const double limit = lambda_new + kTieTolerance * std::abs(lambda_new);
            group.clear();
            while (!heap_.empty()) {
                const MergeEvent e = heap_.top();
                if (stale(e)) {
                    heap_.pop();
                    continue;
                }
                if (e.eta > limit) break;
                heap_.pop();
                group.push_back(e.junction);
            }
            std::sort(group.begin(), group.end());

            touched.clear();
            std::size_t c = 0;
            while (c < group.size()) {
                std::size_t last = c;
                while (last + 1 < group.size() && right_[group[last]] == group[last + 1]) ++last;
                merge_run(std::span<const std::size_t>(group.data() + c, last - c + 1), lambda_new, out,
                          touched);
                c = last + 1;
            }
            std::sort(touched.begin(), touched.end());
            touched.erase(std::unique(touched.begin(), touched.end()), touched.end());
            for (std::size_t j : touched)
                if (right_[j] != npos) schedule(j, lambda_new);
        }
        return out;
    }

private:
    using Heap = std::priority_queue<MergeEvent, std::vector<MergeEvent>, LaterMerge>;

    double slope(std::size_t seg) const {
        const int s_left = left_[seg] == npos ? 0 : sign_right_[left_[seg]];
        return static_cast<double>(sign_right_[seg] - s_left) / (2.0 * weight_[seg]);
    }

    double level(std::size_t seg, double lambda) const {
        return sum_ty_[seg] / weight_[seg] + lambda * beta_[seg];
    }

    bool stale(const MergeEvent& e) const {
        return generation_[e.junction] != e.generation || right_[e.junction] == npos;
    }

    // Merge estimate of junction j, anchored at the current weight.
    void schedule(std::size_t j, double lambda_now) {
        ++generation_[j];
        const std::size_t r = right_[j];
        const double gamma = beta_[j] - beta_[r];
        if (gamma == 0.0) return;
        const double gap = level(j, lambda_now) - level(r, lambda_now);
        heap_.push({lambda_now + std::abs(gap / gamma), j, generation_[j]});
    }

    // Merge a run of adjacent junctions that hit zero at the same weight.
    void merge_run(std::span<const std::size_t> run, double lambda_new, PathResult& out,
                   std::vector<std::size_t>& touched) {
        const std::size_t first = run.front();
        const std::size_t outer_left = left_[first];
        const std::size_t last_seg = right_[run.back()];
        const int s_left = outer_left == npos ? 0 : sign_right_[outer_left];
        const int s_right = sign_right_[last_seg];

        int before = 0;
        int prev_sign = s_left;
        double sum = 0.0;
        double weight = 0.0;
        for (std::size_t seg = first;; seg = right_[seg]) {
            before += is_extremum(prev_sign, sign_right_[seg]) ? 1 : 0;
            prev_sign = sign_right_[seg];
            sum += sum_ty_[seg];
            weight += weight_[seg];
            if (seg == last_seg) break;
        }
        const int after = is_extremum(s_left, s_right) ? 1 : 0;

        for (std::size_t j : run) {
            out.lambda[j] = lambda_new;
            out.dg[j] = 0;
        }
        out.dg[first] = after - before;

        for (std::size_t seg = first; seg != last_seg;) {
            const std::size_t next = right_[seg];
            right_[seg] = npos;
            ++generation_[seg];
            seg = next;
        }
        sum_ty_[last_seg] = sum;
        weight_[last_seg] = weight;
        left_[last_seg] = outer_left;
        if (outer_left != npos) {
            right_[outer_left] = last_seg;
            touched.push_back(outer_left);
        }
        beta_[last_seg] = slope(last_seg);
        touched.push_back(last_seg);
    }

    std::size_t n_;
    std::vector<double> sum_ty_;
    std::vector<double> weight_;
    std::vector<double> beta_;
    std::vector<std::size_t> left_;
    std::vector<std::size_t> right_;
    std::vector<int> sign_right_;
    std::vector<std::uint32_t> generation_;
    Heap heap_;
};

inline void require_no_constant_pieces(std::span<const double> y) {
    for (std::size_t i = 1; i < y.size(); ++i)
        if (y[i] == y[i - 1])
            throw input_error("equal consecutive values at index " + std::to_string(i) +
                              "; collapse constant pieces first");
}

}  // namespace detail

/// Merge weights and extremum-count changes for every junction, O(n log n).
inline PathResult solve_path(std::span<const double> y, std::span<const double> tau) {
    if (y.size() != tau.size()) throw input_error("solve_path: length mismatch");
    detail::require_no_constant_pieces(y);
    return detail::PathSolver(y, tau).run();
}

inline PathResult solve_path(const WeightedSignal& ws) { return solve_path(ws.y, ws.tau); }

/// Extremum count of the raw signal, i.e. g just above zero.
inline std::size_t initial_extrema(const PathResult& path) {
    long g = 1;
    for (int d : path.dg) g -= d;
    return static_cast<std::size_t>(g);
}

}  // namespace tvpath
