#pragma once

#include <cstdint>
#include <random>

namespace alrf {

using Rng = std::mt19937_64;

// Independent sub-stream seed for (seed, stream), via splitmix64 finalization.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace streams {
inline constexpr std::uint64_t init = 1;
inline constexpr std::uint64_t split = 2;
inline constexpr std::uint64_t shuffle = 3;
inline constexpr std::uint64_t dropout = 4;
inline constexpr std::uint64_t probe = 5;
inline constexpr std::uint64_t controller = 6;
} // namespace streams

// Uniform draw in [0, 1).
inline double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

} // namespace alrf
