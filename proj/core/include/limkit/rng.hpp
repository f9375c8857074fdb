#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace limkit {

// All randomness in the toolkit flows through these helpers plus
// std::mt19937_64, whose output sequence is fixed by the standard. The
// distribution adapters in <random> are implementation-defined, so they are
// deliberately not used anywhere an output file depends on the draw.

// splitmix64 finalizer (Steele, Lea, Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Sub-seed for logical stream `stream` of a run seeded with `seed`.
// Distinct streams decorrelate per-sample generators, selection draws and
// repeat runs, and make per-sample simulation order-independent.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    return splitmix64(seed ^ splitmix64(stream));
}

// Uniform double in [0, 1) using the top 53 bits of one engine output.
inline double uniform_unit(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform_in(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform_unit(rng);
}

// Unbiased integer in [0, n) via rejection sampling. n must be > 0.
inline std::uint64_t uniform_below(std::mt19937_64& rng, std::uint64_t n) {
    const std::uint64_t bound = std::numeric_limits<std::uint64_t>::max() / n * n;
    std::uint64_t draw = rng();
    while (draw >= bound) {
        draw = rng();
    }
    return draw % n;
}

}  // namespace limkit
