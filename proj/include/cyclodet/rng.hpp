#pragma once

#include <cstdint>
#include <random>

namespace cyclodet {

/// splitmix64 mixing step.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Deterministic sub-seed for an indexed stream (replication, modality, day).
/// Distinct indices give statistically independent engines for any master seed.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
    return mix64(mix64(master) ^ mix64(stream * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL));
}

inline std::mt19937_64 make_engine(std::uint64_t seed) {
    return std::mt19937_64(seed);
}

}  // namespace cyclodet
