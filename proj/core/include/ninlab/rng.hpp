#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace ninlab {

// SplitMix64 finalizer. Used both as a stream mixer and as the counter-based
// generator behind reproducible noise lookups.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Uniform in (0, 1], suitable as a log() argument.
inline double to_unit_open(std::uint64_t x) {
    return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

// Uniform in [0, 1).
inline double to_unit(std::uint64_t x) {
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// Standard normal addressed by (seed, a, b). Pure function of its inputs, so
// a noise value can be re-queried under any batch ordering.
inline double counter_gauss(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = splitmix64(seed ^ splitmix64(a ^ splitmix64(b)));
    const double u1 = to_unit_open(splitmix64(h));
    const double u2 = to_unit(splitmix64(h + 0x632be59bd9b4e019ULL));
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

// Sequential Gaussian stream (Box-Muller over mt19937_64). We roll our own
// rather than std::normal_distribution so the draw sequence is pinned down
// by this file alone.
class GaussianStream {
public:
    explicit GaussianStream(std::uint64_t seed) : rng_(seed) {}

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = to_unit_open(rng_());
        const double u2 = to_unit(rng_());
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    double next(double mean, double sd) { return mean + sd * next(); }

    // Uniform in [0, 1).
    double next_unit() { return to_unit(rng_()); }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace ninlab
