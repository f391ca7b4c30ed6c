#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

namespace qdarwin::rng {

// Counter-based deterministic randomness ("qdrng-v1").
//
// Every consumer derives an independent stream from (master seed, purpose
// tag, indices). Streams never share state, so any loop over fragments,
// samples or times can be parallelized without changing the numbers drawn.
// Normal variates use an explicit Box-Muller transform rather than
// std::normal_distribution, whose output is implementation-defined.

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

inline std::uint64_t mix64(std::uint64_t z) {
    z += kGolden;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// SplitMix64 stream.
class Stream {
public:
    explicit Stream(std::uint64_t state) : state_(state) {}

    std::uint64_t next_u64() {
        state_ += kGolden;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; the paired variate is cached.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0, 1] so the log is finite.
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phi = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(phi);
        have_spare_ = true;
        return r * std::cos(phi);
    }

    // Unbiased uniform integer in [0, bound) by rejection.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound == 0 ? 0 : (0 - bound) % bound; // 2^64 mod bound
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x < limit);
        return x % bound;
    }

private:
    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Derive the stream for (seed, tag, i0, i1).
inline Stream derive(std::uint64_t seed, std::string_view tag, std::uint64_t i0 = 0,
                     std::uint64_t i1 = 0) {
    std::uint64_t h = mix64(seed ^ fnv1a64(tag));
    h = mix64(h ^ i0);
    h = mix64(h ^ i1);
    return Stream(h);
}

} // namespace qdarwin::rng
