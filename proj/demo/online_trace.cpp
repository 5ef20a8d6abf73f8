// Streams a noisy triangle wave and prints, per sample, the selected
// lambda, the segment count and how much of the path had to be re-solved.
#include <cstdio>

#include "tvpath/tvpath.hpp"

int main() {
    using namespace tvpath;
    const auto clean = sim::gen_periodic(sim::Periodic::pwl, 300, 50);
    auto rng = sim::replication_rng(1, 0);
    const auto y = sim::add_noise(clean, sim::NoiseSpec{2.0, 0.0}, rng);

    StreamState state(StreamOptions{});
    std::printf("%5s %12s %4s %12s %5s %7s %7s\n", "n", "lambda_ours", "K", "last_level", "mode", "suffix", "coarse");
    for (std::size_t i = 0; i < y.size(); ++i) {
        push_sample(state, static_cast<double>(i), y[i]);
        const auto rep = stream_report(state);
        const auto& st = state.last;
        std::printf("%5zu %12.5g %4zu %12.5g %5s %7zu %7zu\n", rep.n, rep.lambda_ours, rep.K, rep.last_level,
                    st.incremental ? "inc" : "full", st.suffix_length, st.coarse_length);
    }
}
