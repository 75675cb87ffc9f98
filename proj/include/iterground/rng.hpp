// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace iterground {

// Deterministic PRNG (splitmix64). Identical sequences on every platform,
// unlike std::normal_distribution whose output is implementation-defined.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed = 0) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, 1)
    double next_double() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // standard normal via Box-Muller; one value per call, two uniforms consumed
    double gaussian() {
        double u1 = 1.0 - next_double(); // (0, 1]
        double u2 = next_double();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

private:
    std::uint64_t state_;
};

inline std::uint64_t mix_bits(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Order-dependent combination of values into one seed. Used to derive
// per-trial and per-iteration seeds so results are schedule-independent.
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t h = 0x6C62272E07BB0142ULL;
    for (std::uint64_t p : parts) {
        h = mix_bits(h ^ (p + 0x9E3779B97F4A7C15ULL + (h << 6) + (h >> 2)));
    }
    return h;
}

inline std::uint64_t double_bits(double v) {
    return std::bit_cast<std::uint64_t>(v);
}

} // namespace iterground
