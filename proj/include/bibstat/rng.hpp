#pragma once

// Seeded random streams for the synthetic generator and the robustness
// draws. The base generator is splitmix64; sub-streams are derived by
// mixing (seed, stream id) through the same finalizer, so per-article
// generation is order-independent. Samplers are written out explicitly
// (no std::*_distribution) to keep sequences pinned to the algorithm
// names recorded in output metadata:
//   uniform   - 53-bit mantissa of splitmix64 output
//   normal    - Box-Muller
//   poisson   - Knuth product-of-uniforms (small means only)
//   gamma     - Marsaglia-Tsang squeeze
//   beta      - ratio of two gamma draws

#include <cmath>
#include <cstdint>

#include "bibstat/errors.hpp"

namespace bibstat {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    // Sub-stream: independent sequence keyed by (seed, stream id).
    static Rng stream(std::uint64_t seed, std::uint64_t stream_id) {
        std::uint64_t s = seed;
        std::uint64_t a = splitmix64_next(s);
        s = a ^ (stream_id * 0xD1B54A32D192ED03ULL + 0x8CB92BA72F3D8DD7ULL);
        return Rng(splitmix64_next(s));
    }

    std::uint64_t next_u64() { return splitmix64_next(state_); }

    // Uniform in [0, 1), 53 significant bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform in (0, 1], safe for log().
    double next_double_open() {
        return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53;
    }

    // Uniform integer in [0, n) by rejection, bias-free.
    std::uint64_t bounded(std::uint64_t n) {
        if (n == 0) throw InvalidArgumentError("bounded: n must be positive");
        const std::uint64_t threshold = (0ULL - n) % n;
        for (;;) {
            std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    bool bernoulli(double p) { return next_double() < p; }

    double normal() {
        double u1 = next_double_open();
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586477 * u2);
    }

    // Knuth's method; adequate for the small means used here.
    int poisson(double mean) {
        if (mean < 0.0) throw InvalidArgumentError("poisson: mean must be nonnegative");
        if (mean == 0.0) return 0;
        const double limit = std::exp(-mean);
        int k = 0;
        double prod = next_double_open();
        while (prod > limit) {
            ++k;
            prod *= next_double_open();
        }
        return k;
    }

    double gamma(double alpha) {
        if (alpha <= 0.0) throw InvalidArgumentError("gamma: alpha must be positive");
        if (alpha < 1.0) {
            double u = next_double_open();
            return gamma(alpha + 1.0) * std::pow(u, 1.0 / alpha);
        }
        const double d = alpha - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x = normal();
            double t = 1.0 + c * x;
            if (t <= 0.0) continue;
            double v = t * t * t;
            double u = next_double_open();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    double beta(double alpha, double b) {
        double x = gamma(alpha);
        double y = gamma(b);
        return x / (x + y);
    }

private:
    std::uint64_t state_;
};

// Name recorded next to every seed in emitted metadata.
inline constexpr const char* kRngAlgorithm = "splitmix64";

} // namespace bibstat
