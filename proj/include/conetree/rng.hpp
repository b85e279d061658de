#pragma once

#include <cstdint>

namespace conetree {

// Counter-based RNG: every draw is a pure function of (seed, stream, counter).
// Traversal order and thread count therefore never affect the values drawn.

inline std::uint64_t mix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

inline std::uint64_t counter_hash(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

// uniform in [0,1)
inline double u01(std::uint64_t h) {
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

inline double uniform01(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return u01(counter_hash(seed, stream, counter));
}

// uniform in [-1,1]
inline double uniform_pm1(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter) {
    return 2.0 * uniform01(seed, stream, counter) - 1.0;
}

} // namespace conetree
