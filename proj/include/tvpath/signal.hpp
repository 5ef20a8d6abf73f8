#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace tvpath {

/// Raised for malformed user input (bad lengths, non-increasing time, NaN...).
class input_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical routine fails to reach its tolerance.
class numerical_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Samples y_i observed at strictly increasing times t_i together with the
 * fidelity weights tau_i derived from the sampling grid.
 *
 * tau_i = t_i - t_{i-1} for i >= 2 and tau_1 = t_2 - t_1. A single sample
 * gets tau_1 = 1.
 *
 * index_map has n+1 entries: collapsed sample i covers original samples
 * [index_map[i], index_map[i+1]). For an uncollapsed signal it is 0..n.
 */
struct WeightedSignal {
    std::vector<double> t;
    std::vector<double> y;
    std::vector<double> tau;
    std::vector<std::size_t> index_map;

    std::size_t size() const noexcept { return y.size(); }
    bool empty() const noexcept { return y.empty(); }
    /// Number of samples before constant-piece collapsing.
    std::size_t original_size() const noexcept {
        return index_map.empty() ? y.size() : index_map.back();
    }
    std::size_t run_length(std::size_t i) const noexcept {
        return index_map[i + 1] - index_map[i];
    }
    bool collapsed() const noexcept { return original_size() != size(); }
};

namespace detail {

inline std::vector<std::size_t> identity_map(std::size_t n) {
    std::vector<std::size_t> m(n + 1);
    for (std::size_t i = 0; i <= n; ++i) m[i] = i;
    return m;
}

}  // namespace detail

inline std::vector<double> weights_from_times(std::span<const double> t) {
    const std::size_t n = t.size();
    std::vector<double> tau(n, 1.0);
    if (n < 2) return tau;
    tau[0] = t[1] - t[0];
    for (std::size_t i = 1; i < n; ++i) tau[i] = t[i] - t[i - 1];
    return tau;
}

inline WeightedSignal build_weighted_signal(std::span<const double> t, std::span<const double> y) {
    if (t.size() != y.size())
        throw input_error("length mismatch: " + std::to_string(t.size()) + " times vs " +
                          std::to_string(y.size()) + " values");
    if (y.empty()) throw input_error("empty signal");
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!std::isfinite(t[i]) || !std::isfinite(y[i]))
            throw input_error("non-finite sample at index " + std::to_string(i));
        if (i > 0 && !(t[i] > t[i - 1]))
            throw input_error("time not strictly increasing at index " + std::to_string(i));
    }
    WeightedSignal ws;
    ws.t.assign(t.begin(), t.end());
    ws.y.assign(y.begin(), y.end());
    ws.tau = weights_from_times(t);
    ws.index_map = detail::identity_map(y.size());
    return ws;
}

/// Unit-spaced samples, t = 0, 1, ..., n-1.
inline WeightedSignal uniform_signal(std::span<const double> y) {
    std::vector<double> t(y.size());
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i);
    return build_weighted_signal(t, y);
}

/// Signal given directly by values and positive weights. Times are synthesised
/// as the running sum of the weights (t_1 = 0) and carry no further meaning.
inline WeightedSignal signal_from_weights(std::span<const double> y, std::span<const double> tau) {
    if (y.size() != tau.size())
        throw input_error("length mismatch between values and weights");
    if (y.empty()) throw input_error("empty signal");
    WeightedSignal ws;
    ws.y.assign(y.begin(), y.end());
    ws.tau.assign(tau.begin(), tau.end());
    ws.t.resize(y.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        if (!(tau[i] > 0.0) || !std::isfinite(tau[i]))
            throw input_error("weight must be positive at index " + std::to_string(i));
        if (!std::isfinite(y[i])) throw input_error("non-finite value at index " + std::to_string(i));
        if (i > 0) acc += tau[i];
        ws.t[i] = acc;
    }
    ws.index_map = detail::identity_map(y.size());
    return ws;
}

/**
 * Replace every maximal run of bitwise-equal consecutive values by a single
 * sample carrying the summed weight. The time of a run is its first time.
 */
inline WeightedSignal collapse_constant_pieces(const WeightedSignal& ws) {
    WeightedSignal out;
    const std::size_t n = ws.size();
    if (n == 0) return out;
    const auto& map = ws.index_map.empty() ? detail::identity_map(n) : ws.index_map;
    out.t.reserve(n);
    out.y.reserve(n);
    out.tau.reserve(n);
    out.index_map.reserve(n + 1);
    out.index_map.push_back(map[0]);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        double w = ws.tau[i];
        while (j < n && ws.y[j] == ws.y[i]) w += ws.tau[j++];
        out.t.push_back(ws.t[i]);
        out.y.push_back(ws.y[i]);
        out.tau.push_back(w);
        out.index_map.push_back(map[j]);
        i = j;
    }
    return out;
}

/// Repeat per-sample values of a collapsed signal over the original samples.
inline std::vector<double> expand_to_original(const WeightedSignal& ws, std::span<const double> u) {
    if (u.size() != ws.size()) throw input_error("expansion length mismatch");
    std::vector<double> out(ws.original_size());
    for (std::size_t i = 0; i < ws.size(); ++i)
        for (std::size_t k = ws.index_map[i]; k < ws.index_map[i + 1]; ++k) out[k] = u[i];
    return out;
}

}  // namespace tvpath
