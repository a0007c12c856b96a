#pragma once

#include <cstdint>
#include <random>

namespace seqpred {

// SplitMix64 finalizer, used to derive substream seeds from a master seed.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Seed of the index-th substream of a master seed. Substreams are keyed by
// index, not by draw order, so partitioned work gives the same answer no
// matter how it is scheduled.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t index) {
    return mix64(master ^ mix64(index + 1));
}

// Uniform double in [0, 1) from the top 53 bits of the engine output.
// std::uniform_real_distribution is implementation-defined; this is not.
inline double uniform01(std::mt19937_64& g) {
    return static_cast<double>(g() >> 11) * 0x1.0p-53;
}

// Uniform double in (0, 1); redraws the (probability 2^-53) exact zero.
inline double uniform01_positive(std::mt19937_64& g) {
    double u = uniform01(g);
    while (u == 0.0) u = uniform01(g);
    return u;
}

}  // namespace seqpred
