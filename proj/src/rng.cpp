#include "latkey/rng.hpp"

namespace latkey {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& s : state_) s = splitmix64(sm);
}

std::uint64_t Rng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

Int Rng::bits(unsigned nbits) {
    static_assert(sizeof(unsigned long) == 8, "64-bit unsigned long expected");
    Int r = 0;
    unsigned remaining = nbits;
    while (remaining >= 64) {
        r <<= 64;
        r += Int(static_cast<unsigned long>(next_u64()));
        remaining -= 64;
    }
    if (remaining) {
        r <<= remaining;
        r += Int(static_cast<unsigned long>(next_u64() >> (64 - remaining)));
    }
    return r;
}

Int Rng::below(const Int& bound) {
    if (bound <= 0) throw std::invalid_argument("Rng::below: bound must be positive");
    unsigned nb = bit_length(bound);
    for (;;) {
        Int c = bits(nb);
        if (c < bound) return c;
    }
}

Int Rng::unit_range(const Int& bound) {
    if (bound < 2) throw std::invalid_argument("Rng::unit_range: bound must be >= 2");
    return 1 + below(bound - 1);
}

Rng Rng::fork(std::uint64_t index) const { return Rng(mix(seed_, index)); }

std::uint64_t Rng::mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t x = a ^ (0x9e3779b97f4a7c15ULL + (b << 1));
    splitmix64(x);
    std::uint64_t y = x ^ b;
    return splitmix64(y);
}

}  // namespace latkey
