#pragma once

#include "flowphd/types.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace flowphd {

/// Deterministic random source. The mapping from engine output to
/// uniform/normal/Poisson variates is pinned here (rather than delegated to
/// the standard distributions, whose algorithms are implementation-defined)
/// so that a seed fully determines every simulated byte.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform double in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller; the second variate of each pair is
    /// cached for the next call.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        cached_ = radius * std::sin(angle);
        has_cached_ = true;
        return radius * std::cos(angle);
    }

    Vec2 normal_vec2() { return {normal(), normal()}; }

    Vec4 normal_vec4() { return {normal(), normal(), normal(), normal()}; }

    /// Poisson count by Knuth's product method; adequate for the small
    /// per-frame clutter rates used here.
    int poisson(double mean) {
        if (mean <= 0.0) {
            return 0;
        }
        const double limit = std::exp(-mean);
        int count = -1;
        double product = 1.0;
        do {
            ++count;
            product *= uniform();
        } while (product > limit);
        return count;
    }

    /// Uniform index in [0, n).
    std::size_t index(std::size_t n) {
        const auto i = static_cast<std::size_t>(uniform() * static_cast<double>(n));
        return i < n ? i : n - 1;
    }

    std::uint64_t raw() { return engine_(); }

    /// splitmix64-style mix for deriving independent substream seeds.
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
        std::uint64_t x = a + 0x9e3779b97f4a7c15ull * (b + 1);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ull;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebull;
        x ^= x >> 31;
        return x;
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace flowphd
