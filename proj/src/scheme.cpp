#include "latkey/scheme.hpp"

#include "latkey/sha256.hpp"

#include <algorithm>
#include <stdexcept>

namespace latkey {

namespace {

constexpr int kMillerRabinReps = 64;
constexpr int kResampleBudget = 10000;

[[noreturn]] void fail(const std::string& what) { throw std::invalid_argument(what); }

}  // namespace

void SchemeParams::validate() const {
    if (q < 2 || !is_probable_prime(q, kMillerRabinReps)) fail("q is not prime");
    if (ell != bit_length(q)) fail("ell does not match bit length of q");
    if (p < 3 || !is_probable_prime(p, kMillerRabinReps)) fail("p is not prime");
    if (kind == SchemeKind::Dsa) {
        if ((p - 1) % q != 0) fail("q does not divide p-1");
        Int gr = mod_pos(g, p);
        if (gr <= 1) fail("generator must be > 1 mod p");
        if (pow_mod(gr, q, p) != 1) fail("generator does not have order dividing q");
    } else {
        Int disc = mod_pos(4 * curve_a * curve_a * curve_a + 27 * curve_b * curve_b, p);
        if (disc == 0) fail("singular curve");
        if (gen.inf) fail("base point is the point at infinity");
        if (!ec_on_curve(*this, gen)) fail("base point not on curve");
        if (!ec_mul(*this, q, gen).inf) fail("base point order is not q");
    }
}

void EphemeralPattern::validate() const {
    if (delta == 0) fail("pattern: delta must be positive");
    if (delta_l > delta) fail("pattern: delta_l exceeds delta");
    if (delta >= ell) fail("pattern: delta must be < ell");
    if (msb_bits < 0 || bit_length(msb_bits) > delta_m()) fail("pattern: msb value too wide");
    if (lsb_bits < 0 || bit_length(lsb_bits) > delta_l) fail("pattern: lsb value too wide");
}

SchemeParams gen_group_params(unsigned q_bits, unsigned p_bits, Rng& rng) {
    if (q_bits < 2 || q_bits >= p_bits) fail("gen_group_params: need 2 <= q_bits < p_bits");

    for (int attempt = 0; attempt < kResampleBudget; ++attempt) {
        // q: uniform prime of exactly q_bits bits
        Int q = rng.bits(q_bits - 1) + pow2(q_bits - 1);
        if (!is_probable_prime(q, kMillerRabinReps)) continue;

        // p = q*t + 1 with even t, scanned upward through the p_bits window
        Int p_lo = pow2(p_bits - 1), p_hi = pow2(p_bits) - 1;
        Int t = (p_lo - 1 + q - 1) / q;
        if (t % 2 != 0) ++t;
        Int p;
        bool found = false;
        for (; (p = q * t + 1) <= p_hi; t += 2) {
            if (p >= p_lo && is_probable_prime(p, kMillerRabinReps)) {
                found = true;
                break;
            }
        }
        if (!found) continue;

        // generator of the order-q subgroup
        for (Int h = 2; h < p - 1; ++h) {
            Int g = pow_mod(h, (p - 1) / q, p);
            if (g != 1) {
                SchemeParams params;
                params.kind = SchemeKind::Dsa;
                params.p = p;
                params.q = q;
                params.ell = q_bits;
                params.g = g;
                params.validate();
                return params;
            }
        }
    }
    fail("gen_group_params: no (p, q) pair found within retry budget");
}

SchemeParams gen_curve_params(const Int& p, const Int& a, const Int& b,
                              const EcPoint& gen, const Int& q) {
    SchemeParams params;
    params.kind = SchemeKind::Ecdsa;
    params.p = p;
    params.q = q;
    params.ell = bit_length(q);
    params.curve_a = mod_pos(a, p);
    params.curve_b = mod_pos(b, p);
    params.gen = gen;
    params.validate();
    return params;
}

SchemeParams toy_curve() {
    // y^2 = x^3 + 4x + 12 over F_65519; the group itself has prime order
    // 65287, so the base point generates everything.
    return gen_curve_params(65519, 4, 12, EcPoint(0, 46133), 65287);
}

bool ec_on_curve(const SchemeParams& params, const EcPoint& pt) {
    if (pt.inf) return true;
    if (pt.x < 0 || pt.x >= params.p || pt.y < 0 || pt.y >= params.p) return false;
    Int lhs = mod_pos(pt.y * pt.y, params.p);
    Int rhs = mod_pos(pt.x * pt.x * pt.x + params.curve_a * pt.x + params.curve_b, params.p);
    return lhs == rhs;
}

EcPoint ec_add(const SchemeParams& params, const EcPoint& p1, const EcPoint& p2) {
    const Int& p = params.p;
    if (p1.inf) return p2;
    if (p2.inf) return p1;
    if (p1.x == p2.x && mod_pos(p1.y + p2.y, p) == 0) return EcPoint::infinity();
    Int lambda;
    if (p1.x == p2.x && p1.y == p2.y) {
        lambda = mod_pos((3 * p1.x * p1.x + params.curve_a) * inv_mod(2 * p1.y, p), p);
    } else {
        lambda = mod_pos((p2.y - p1.y) * inv_mod(mod_pos(p2.x - p1.x, p), p), p);
    }
    Int x3 = mod_pos(lambda * lambda - p1.x - p2.x, p);
    Int y3 = mod_pos(lambda * (p1.x - x3) - p1.y, p);
    return EcPoint(x3, y3);
}

EcPoint ec_mul(const SchemeParams& params, const Int& scalar, const EcPoint& pt) {
    Int k = scalar;
    EcPoint base = pt;
    if (k < 0) {
        k = -k;
        if (!base.inf) base.y = mod_pos(-base.y, params.p);
    }
    EcPoint acc = EcPoint::infinity();
    while (k > 0) {
        if (mpz_odd_p(k.get_mpz_t())) acc = ec_add(params, acc, base);
        base = ec_add(params, base, base);
        k >>= 1;
    }
    return acc;
}

KeyPair keypair_from_private(const SchemeParams& params, const Int& a) {
    if (a < 1 || a > params.q - 1) fail("private key out of range [1, q-1]");
    KeyPair kp;
    kp.a = a;
    if (params.kind == SchemeKind::Dsa) {
        kp.pub.dsa = pow_mod(params.g, a, params.p);
    } else {
        kp.pub.ec = ec_mul(params, a, params.gen);
    }
    return kp;
}

KeyPair keygen(const SchemeParams& params, Rng& rng) {
    return keypair_from_private(params, rng.unit_range(params.q));
}

std::optional<SignedMessage> sign(const SchemeParams& params, const Int& a,
                                  const Int& h, const Int& k) {
    if (k < 1 || k > params.q - 1) fail("sign: k out of range [1, q-1]");
    if (h < 0 || h >= params.q) fail("sign: h out of range [0, q)");
    Int r;
    if (params.kind == SchemeKind::Dsa) {
        r = mod_pos(pow_mod(params.g, k, params.p), params.q);
    } else {
        EcPoint kp = ec_mul(params, k, params.gen);
        if (kp.inf) return std::nullopt;  // cannot happen for 0 < k < q
        r = mod_pos(kp.x, params.q);
    }
    if (r == 0) return std::nullopt;
    Int s = mod_pos(inv_mod(k, params.q) * (h + a * r), params.q);
    if (s == 0) return std::nullopt;
    return SignedMessage{h, r, s};
}

bool verify(const SchemeParams& params, const PublicKey& pub, const Int& h,
            const SignedMessage& sig) {
    const Int& q = params.q;
    if (sig.r < 1 || sig.r >= q || sig.s < 1 || sig.s >= q) return false;
    if (h < 0 || h >= q) return false;
    Int w = inv_mod(sig.s, q);
    Int u1 = mod_pos(h * w, q);
    Int u2 = mod_pos(sig.r * w, q);
    if (params.kind == SchemeKind::Dsa) {
        Int lhs = mod_pos(pow_mod(params.g, u1, params.p) * pow_mod(pub.dsa, u2, params.p),
                          params.p);
        return mod_pos(lhs, q) == sig.r;
    }
    EcPoint sum = ec_add(params, ec_mul(params, u1, params.gen), ec_mul(params, u2, pub.ec));
    if (sum.inf) return false;
    return mod_pos(sum.x, q) == sig.r;
}

std::vector<Int> sample_shared_ephemerals(const SchemeParams& params,
                                          const EphemeralPattern& pattern,
                                          std::size_t count, Rng& rng) {
    pattern.validate();
    if (pattern.ell != params.ell) fail("pattern ell does not match scheme");
    if (count < 2) fail("sample_shared_ephemerals: count must be >= 2");
    if (pattern.ell - pattern.delta < 1) fail("pattern leaves no free bit");

    const unsigned ell = pattern.ell;
    const unsigned dm = pattern.delta_m();
    const unsigned dl = pattern.delta_l;
    const unsigned mid_bits = ell - dm - dl;  // free bits between the blocks

    // msb block pinned to the top dm bits, lsb block to the bottom dl bits;
    // this keeps every pairwise difference below 2^{ell-dm}
    Int shared = (pattern.msb_bits << (ell - dm)) + pattern.lsb_bits;

    std::vector<Int> out;
    out.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        bool ok = false;
        for (int tries = 0; tries < kResampleBudget; ++tries) {
            Int k = shared + (rng.bits(mid_bits) << dl);
            if (k > 0 && k < params.q) {
                out.push_back(k);
                ok = true;
                break;
            }
        }
        if (!ok) throw std::runtime_error("sample_shared_ephemerals: resample budget exhausted");
    }
    return out;
}

EphemeralPattern draw_pattern(const SchemeParams& params, unsigned delta, unsigned delta_l,
                              Rng& rng) {
    EphemeralPattern pat;
    pat.ell = params.ell;
    pat.delta = delta;
    pat.delta_l = delta_l;
    pat.msb_bits = 0;
    pat.lsb_bits = 0;
    pat.validate();
    for (int tries = 0; tries < kResampleBudget; ++tries) {
        pat.msb_bits = rng.bits(pat.delta_m());
        pat.lsb_bits = rng.bits(delta_l);
        // feasible iff some k < q carries the shared prefix
        Int lowest = (pat.msb_bits << (params.ell - pat.delta_m())) + pat.lsb_bits;
        if (lowest < params.q) return pat;
    }
    throw std::runtime_error("draw_pattern: no feasible shared values for this q");
}

namespace {

Int draw_hash(const SchemeParams& params, HashMode mode, Rng& rng) {
    if (mode == HashMode::Passthrough) return rng.below(params.q);
    std::vector<std::uint8_t> msg(32);
    for (auto& b : msg) b = std::uint8_t(rng.next_u64());
    auto digest = sha256(msg);
    Int h = 0;
    for (auto b : digest) h = (h << 8) + b;
    return mod_pos(h, params.q);
}

AttackInstance build_instance(const SchemeParams& params, const KeyPair& kp,
                              std::size_t n, const EphemeralPattern& pattern,
                              HashMode hash_mode, Rng& rng, bool shared_nonces) {
    if (n < 1) fail("make_instance: n must be >= 1");
    if (pattern.ell != params.ell) fail("make_instance: pattern ell mismatch");
    pattern.validate();

    const std::size_t count = n + 1;
    std::vector<Int> ks;
    if (shared_nonces) {
        ks = sample_shared_ephemerals(params, pattern, count, rng);
        // the attack's derivation needs a unique minimum, so resample collisions
        for (std::size_t j = 0; j < ks.size(); ++j) {
            int tries = 0;
            while (std::count(ks.begin(), ks.end(), ks[j]) > 1) {
                if (++tries > kResampleBudget)
                    throw std::runtime_error("make_instance: cannot make nonces distinct");
                ks[j] = sample_shared_ephemerals(params, pattern, 2, rng)[0];
            }
        }
    } else {
        ks.reserve(count);
        for (std::size_t j = 0; j < count; ++j) ks.push_back(rng.unit_range(params.q));
    }

    AttackInstance inst;
    inst.params = params;
    inst.pub = kp.pub;
    inst.ell = pattern.ell;
    inst.delta = pattern.delta;
    inst.delta_l = pattern.delta_l;
    inst.msgs.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        std::optional<SignedMessage> sig;
        int tries = 0;
        for (;;) {
            sig = sign(params, kp.a, draw_hash(params, hash_mode, rng), ks[j]);
            if (sig) break;
            if (++tries > 100) throw std::runtime_error("make_instance: signing retries exhausted");
        }
        inst.msgs.push_back(*sig);
    }

    InstanceMeta meta;
    meta.a = kp.a;
    meta.k = ks;
    meta.min_index = std::min_element(ks.begin(), ks.end()) - ks.begin();
    inst.meta = meta;
    return inst;
}

}  // namespace

AttackInstance make_instance(const SchemeParams& params, const KeyPair& kp,
                             std::size_t n, const EphemeralPattern& pattern,
                             HashMode hash_mode, Rng& rng) {
    return build_instance(params, kp, n, pattern, hash_mode, rng, true);
}

AttackInstance make_instance_uniform(const SchemeParams& params, const KeyPair& kp,
                                     std::size_t n, const EphemeralPattern& pattern,
                                     HashMode hash_mode, Rng& rng) {
    return build_instance(params, kp, n, pattern, hash_mode, rng, false);
}

}  // namespace latkey
