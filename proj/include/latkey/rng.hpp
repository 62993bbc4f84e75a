#pragma once

#include "latkey/bignum.hpp"

#include <cstdint>

namespace latkey {

// Deterministic xoshiro256** generator seeded through splitmix64.
//
// All randomness in the library flows through explicit Rng instances so that
// every experiment is reproducible from a 64-bit seed, independent of the
// platform's std::random implementation. Independent streams are derived
// with fork(), which mixes (seed, stream index) through splitmix64.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform integer with exactly `nbits` random bits (top bit not forced).
    Int bits(unsigned nbits);

    // Uniform in [0, bound), bound > 0. Rejection sampling on bit_length(bound-? )
    Int below(const Int& bound);

    // Uniform in [1, bound-1], bound >= 2.
    Int unit_range(const Int& bound);

    // Independent deterministic substream for (this seed, index).
    Rng fork(std::uint64_t index) const;

    static std::uint64_t mix(std::uint64_t a, std::uint64_t b);

    std::uint64_t seed() const { return seed_; }

private:
    std::uint64_t state_[4];
    std::uint64_t seed_;
};

}  // namespace latkey
