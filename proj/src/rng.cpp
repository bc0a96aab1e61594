#include "stdf/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace stdf {

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id, std::uint64_t substream_id) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream_id), static_cast<std::uint32_t>(stream_id >> 32),
        static_cast<std::uint32_t>(substream_id), static_cast<std::uint32_t>(substream_id >> 32)};
    eng_.seed(seq);
}

std::uint64_t RngStream::next_u64() { return eng_(); }

double RngStream::uniform01() {
    // 53 significant bits, shifted half a step off the endpoints.
    return (double(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::uniform_below(std::uint64_t n) {
    if (n == 0) throw std::domain_error("uniform_below: n must be positive");
    const std::uint64_t rem = (std::numeric_limits<std::uint64_t>::max() - n + 1) % n;  // 2^64 mod n
    std::uint64_t x;
    do {
        x = next_u64();
    } while (x < rem);
    return x % n;
}

double RngStream::exponential() { return -std::log(uniform01()); }

double RngStream::normal() {
    if (have_cached_normal_) {
        have_cached_normal_ = false;
        return cached_normal_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_normal_ = r * std::sin(a);
    have_cached_normal_ = true;
    return r * std::cos(a);
}

double RngStream::gamma(double shape) {
    if (!(shape > 0.0)) throw std::domain_error("gamma: shape must be positive");
    if (shape < 1.0) {
        const double u = uniform01();
        return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / (3.0 * std::sqrt(d));
    for (;;) {
        double x, v;
        do {
            x = normal();
            v = 1.0 + c * x;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = uniform01();
        if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
        if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
    }
}

double RngStream::beta(double a, double b) {
    const double x = gamma(a);
    const double y = gamma(b);
    return x / (x + y);
}

double RngStream::log_positive_stable(double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("log_positive_stable: alpha must be in (0, 1]");
    if (alpha == 1.0) return 0.0;
    const double theta = std::numbers::pi * uniform01();
    const double log_e = std::log(exponential());
    return std::log(std::sin(alpha * theta)) - std::log(std::sin(theta)) / alpha +
           (1.0 - alpha) / alpha * (std::log(std::sin((1.0 - alpha) * theta)) - log_e);
}

}  // namespace stdf
