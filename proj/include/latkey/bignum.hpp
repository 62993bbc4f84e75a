#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace latkey {

using Int = mpz_class;
using Rat = mpq_class;

inline unsigned bit_length(const Int& x) {
    if (x == 0) return 0;
    return static_cast<unsigned>(mpz_sizeinbase(x.get_mpz_t(), 2));
}

inline Int pow2(unsigned e) {
    Int r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, e);
    return r;
}

inline Int pow_mod(const Int& base, const Int& exp, const Int& mod) {
    Int r;
    mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
    return r;
}

// Inverse of a mod m; throws if gcd(a, m) != 1.
inline Int inv_mod(const Int& a, const Int& m) {
    Int r;
    if (mpz_invert(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t()) == 0)
        throw std::domain_error("inv_mod: element not invertible");
    return r;
}

// Canonical representative in [0, m).
inline Int mod_pos(const Int& a, const Int& m) {
    Int r;
    mpz_mod(r.get_mpz_t(), a.get_mpz_t(), m.get_mpz_t());
    return r;
}

inline bool is_probable_prime(const Int& n, int reps = 64) {
    return mpz_probab_prime_p(n.get_mpz_t(), reps) != 0;
}

// Nearest integer to num/den (den > 0), ties toward +infinity.
inline Int div_round_nearest(const Int& num, const Int& den) {
    Int q, r;
    mpz_fdiv_qr(q.get_mpz_t(), r.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    if (2 * r >= den) ++q;
    return q;
}

// Exact conversion helpers for decimal-string JSON fields.
inline std::string to_dec(const Int& x) { return x.get_str(10); }

inline Int from_dec(const std::string& s) {
    Int x;
    if (s.empty() || mpz_set_str(x.get_mpz_t(), s.c_str(), 10) != 0)
        throw std::invalid_argument("invalid decimal integer: '" + s + "'");
    return x;
}

// long double approximation of an Int (mpz_get_d only gives double precision
// on the mantissa, which is fine for the uses here; the exponent handling is
// what matters for 300+ bit operands).
inline long double to_ld(const Int& x) {
    long exp2 = 0;
    double mant = mpz_get_d_2exp(&exp2, x.get_mpz_t());
    return ldexpl(static_cast<long double>(mant), static_cast<int>(exp2));
}

// num/den as long double; safe even when both operands far exceed the
// floating-point exponent range (only their ratio has to fit).
inline long double to_ld_ratio(const Int& num, const Int& den) {
    long en = 0, ed = 0;
    double mn = mpz_get_d_2exp(&en, num.get_mpz_t());
    double md = mpz_get_d_2exp(&ed, den.get_mpz_t());
    return ldexpl(static_cast<long double>(mn) / static_cast<long double>(md),
                  static_cast<int>(en - ed));
}

inline long double to_ld(const Rat& x) {
    return to_ld_ratio(Int(x.get_num()), Int(x.get_den()));
}

// log2 of a positive Int, accurate to ~1e-15 relative.
inline double log2_of(const Int& x) {
    long exp2 = 0;
    double mant = mpz_get_d_2exp(&exp2, x.get_mpz_t());
    return std::log2(mant) + static_cast<double>(exp2);
}

}  // namespace latkey
