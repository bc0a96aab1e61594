// Deterministic random number streams. A stream is fully determined by
// (seed, stream_id, substream_id) on every platform: the engine is the
// bit-exact standard mt19937_64 and all variate transforms live here rather
// than in std:: distributions (whose output is implementation-defined).
#pragma once

#include <cstdint>
#include <random>

namespace stdf {

class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::uint64_t stream_id = 0,
                       std::uint64_t substream_id = 0);

    std::uint64_t next_u64();

    // Strictly inside (0, 1): safe under log().
    double uniform01();

    // Uniform on {0, ..., n - 1}, rejection-corrected (no modulo bias).
    std::uint64_t uniform_below(std::uint64_t n);

    double exponential();  // rate 1
    double normal();       // Box-Muller, second variate cached
    double gamma(double shape);  // scale 1, Marsaglia-Tsang (boosted for shape < 1)
    double beta(double a, double b);

    // log S where S is one-sided alpha-stable with E[exp(-t S)] = exp(-t^alpha),
    // alpha in (0, 1]; alpha = 1 gives S = 1. Chambers-Mallows-Stuck in log
    // space so tiny alpha stays finite.
    double log_positive_stable(double alpha);

private:
    std::mt19937_64 eng_;
    double cached_normal_ = 0.0;
    bool have_cached_normal_ = false;
};

}  // namespace stdf
