#pragma once

#include "latkey/bignum.hpp"
#include "latkey/rng.hpp"

#include <optional>
#include <vector>

namespace latkey {

enum class SchemeKind { Dsa, Ecdsa };

struct EcPoint {
    Int x = 0, y = 0;
    bool inf = true;

    EcPoint() = default;
    EcPoint(Int px, Int py) : x(std::move(px)), y(std::move(py)), inf(false) {}
    static EcPoint infinity() { return EcPoint{}; }

    bool operator==(const EcPoint& o) const {
        if (inf || o.inf) return inf == o.inf;
        return x == o.x && y == o.y;
    }
};

// Group/curve description. For Dsa: (p, q, g). For Ecdsa: (p, curve_a,
// curve_b, gen, q) with q the (prime) order of gen.
struct SchemeParams {
    SchemeKind kind = SchemeKind::Dsa;
    Int p, q;
    unsigned ell = 0;  // bit length of q
    Int g;             // Dsa generator
    Int curve_a, curve_b;
    EcPoint gen;

    // Full invariant check: primality, subgroup orders, curve membership.
    // Throws std::invalid_argument describing the first violated condition.
    void validate() const;
};

struct PublicKey {
    Int dsa;      // g^a mod p
    EcPoint ec;   // a*P
};

struct KeyPair {
    Int a;
    PublicKey pub;
};

struct SignedMessage {
    Int h, r, s;
};

// Which bit positions of the ephemeral keys are pinned to shared values:
// the top delta_m bits and the lowest delta_l bits. This placement bounds
// every pairwise difference k_j - k_min by 2^{ell - delta_m}, which is what
// the key-recovery derivation relies on.
struct EphemeralPattern {
    unsigned ell = 0;
    unsigned delta = 0;
    unsigned delta_l = 0;
    Int msb_bits = 0;  // delta_m-bit shared value
    Int lsb_bits = 0;  // delta_l-bit shared value

    unsigned delta_m() const { return delta - delta_l; }
    void validate() const;
};

struct InstanceMeta {
    Int a;
    std::vector<Int> k;
    std::size_t min_index = 0;
};

struct AttackInstance {
    SchemeParams params;
    PublicKey pub;
    std::vector<SignedMessage> msgs;  // n+1 entries
    unsigned ell = 0, delta = 0, delta_l = 0;
    std::optional<InstanceMeta> meta;

    std::size_t n() const { return msgs.size() - 1; }
};

enum class HashMode { Passthrough, Hashed };

// ---- group / curve setup ----

// DSA-style group: q prime of exactly q_bits bits, p = q*t + 1 prime of
// exactly p_bits bits, g of order q. Deterministic for a given rng seed.
SchemeParams gen_group_params(unsigned q_bits, unsigned p_bits, Rng& rng);

// Validates explicit curve data (rejects singular curves, off-curve or
// wrong-order base points, composite q).
SchemeParams gen_curve_params(const Int& p, const Int& a, const Int& b,
                              const EcPoint& gen, const Int& q);

// Built-in fully brute-forceable test curve (16-bit prime order).
SchemeParams toy_curve();

// ---- elliptic curve arithmetic (affine, schoolbook) ----
EcPoint ec_add(const SchemeParams& params, const EcPoint& p1, const EcPoint& p2);
EcPoint ec_mul(const SchemeParams& params, const Int& scalar, const EcPoint& pt);
bool ec_on_curve(const SchemeParams& params, const EcPoint& pt);

// ---- keys and signatures ----

KeyPair keygen(const SchemeParams& params, Rng& rng);
KeyPair keypair_from_private(const SchemeParams& params, const Int& a);

// Returns nullopt when r = 0 or s = 0 (caller picks a fresh k).
std::optional<SignedMessage> sign(const SchemeParams& params, const Int& a,
                                  const Int& h, const Int& k);

bool verify(const SchemeParams& params, const PublicKey& pub, const Int& h,
            const SignedMessage& sig);

// ---- instance generation ----

// `count` ephemeral keys sharing the pattern's msb/lsb blocks, each in
// (0, q), free bits uniform. Candidates hitting 0 or >= q are resampled.
std::vector<Int> sample_shared_ephemerals(const SchemeParams& params,
                                          const EphemeralPattern& pattern,
                                          std::size_t count, Rng& rng);

// Random shared-bit values that are feasible for this q (a pinned msb prefix
// can otherwise push every candidate past q).
EphemeralPattern draw_pattern(const SchemeParams& params, unsigned delta, unsigned delta_l,
                              Rng& rng);

// n+1 signatures under a fresh pattern-constrained nonce each, with ground
// truth recorded in meta. Nonces are additionally kept pairwise distinct so
// the minimum is unique.
AttackInstance make_instance(const SchemeParams& params, const KeyPair& kp,
                             std::size_t n, const EphemeralPattern& pattern,
                             HashMode hash_mode, Rng& rng);

// Negative-control variant: independent uniform nonces in [1, q-1]; the
// instance still *claims* the (delta, delta_l) of `pattern`.
AttackInstance make_instance_uniform(const SchemeParams& params, const KeyPair& kp,
                                     std::size_t n, const EphemeralPattern& pattern,
                                     HashMode hash_mode, Rng& rng);

}  // namespace latkey
