// rng.hpp
// Deterministic seed derivation shared across modules, so independent
// subsystems draw from decorrelated streams of one experiment seed.

#pragma once

#include <cstdint>

namespace emt {

// splitmix64 over the combined value.
inline std::uint64_t seed_mix(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace seed_salt {
inline constexpr std::uint64_t kWeights = 0x11;
inline constexpr std::uint64_t kTrain = 0x22;
inline constexpr std::uint64_t kDropout = 0x33;
inline constexpr std::uint64_t kPath = 0x44;
}  // namespace seed_salt

}  // namespace emt
