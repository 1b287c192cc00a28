#pragma once

#include <cstdint>
#include <random>

namespace xmodel {

/// splitmix64 step; used to derive well-mixed seeds from (seed, stream) pairs.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/**
 * @brief Derives an independent engine for a named substream of a root seed.
 *
 * Streams derived from the same (seed, stream...) tuple are identical no
 * matter which thread or in which order they are drawn, which keeps
 * bootstrap draws and per-draw reconstructions reproducible under any
 * scheduling.
 */
inline std::mt19937_64 substream(std::uint64_t seed, std::uint64_t stream_a,
                                 std::uint64_t stream_b = 0) {
    std::uint64_t s = seed;
    std::uint64_t mixed = splitmix64(s);
    s ^= stream_a + 0x9e3779b97f4a7c15ULL;
    mixed ^= splitmix64(s);
    s ^= stream_b + 0xd1b54a32d192ed03ULL;
    mixed ^= splitmix64(s);
    return std::mt19937_64(mixed);
}

}  // namespace xmodel
