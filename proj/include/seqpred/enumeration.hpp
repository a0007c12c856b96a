#pragma once

#include <cstdint>
#include <string>

#include "seqpred/alphabet.hpp"
#include "seqpred/errors.hpp"

namespace seqpred {

// Exact enumeration refuses once |X|^n exceeds 2^exact_cap; the default cap
// is 16 (65536 paths on a binary alphabet). Larger horizons must go through
// the Monte Carlo estimators explicitly.
inline constexpr int kDefaultExactCap = 16;

// |X|^n, throwing enumeration_cap_error when it exceeds 2^exact_cap.
inline std::uint64_t checked_path_count(const Alphabet& a, int n, int exact_cap) {
    if (n < 0) throw input_error("horizon must be nonnegative");
    if (exact_cap < 0 || exact_cap > 62) throw input_error("exact cap must lie in [0, 62]");
    const std::uint64_t limit = std::uint64_t{1} << exact_cap;
    std::uint64_t count = 1;
    for (int i = 0; i < n; ++i) {
        count *= static_cast<std::uint64_t>(a.size());
        if (count > limit)
            throw enumeration_cap_error("exact enumeration refused: |X|^" + std::to_string(n) +
                                        " exceeds 2^" + std::to_string(exact_cap) +
                                        " paths; raise the cap or use Monte Carlo");
    }
    return count;
}

// Lexicographic index of a length-n string, first symbol most significant.
inline std::uint64_t encode_string(const History& h) {
    std::uint64_t idx = 0;
    for (int t = 0; t < h.length(); ++t)
        idx = idx * static_cast<std::uint64_t>(h.alphabet().size()) + static_cast<std::uint64_t>(h.at(t));
    return idx;
}

// Inverse of encode_string; fills h with the length-n string of this index.
inline void decode_string(History& h, std::uint64_t idx, int n) {
    const auto size = static_cast<std::uint64_t>(h.alphabet().size());
    while (h.length() > 0) h.pop();
    std::uint64_t rev = 0;
    for (int t = 0; t < n; ++t) {
        rev = rev * size + idx % size;
        idx /= size;
    }
    for (int t = 0; t < n; ++t) {
        h.push(static_cast<Symbol>(rev % size));
        rev /= size;
    }
}

}  // namespace seqpred
