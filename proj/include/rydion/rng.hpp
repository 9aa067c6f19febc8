#pragma once

#include <cstdint>
#include <random>

namespace rydion {

/// SplitMix64 bit mixer, used to derive independent deterministic
/// sub-seeds from (seed, field index, trajectory index) tuples.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a) {
    return splitmix64(seed ^ splitmix64(a));
}

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return splitmix64(seed ^ splitmix64(a ^ splitmix64(b)));
}

/// Uniform double in [0, 1) from the engine's raw 64-bit output; avoids
/// std::uniform_real_distribution, whose stream is not specified by the
/// standard and differs between library implementations.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Seed of a classical ionization-probability task; shared by the sweep
/// engine and the CLI so both paths produce identical ensembles.
inline std::uint64_t classical_task_seed(std::uint64_t seed, int field_index,
                                         int m0_key) {
    return mix_seed(seed, static_cast<std::uint64_t>(field_index),
                    static_cast<std::uint64_t>(m0_key + 64));
}

} // namespace rydion
