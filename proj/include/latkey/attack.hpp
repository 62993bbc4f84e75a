#pragma once

#include "latkey/enumeration.hpp"
#include "latkey/lattice.hpp"
#include "latkey/scheme.hpp"

#include <optional>

namespace latkey {

// Per-signature coefficients of the signing congruence k + A*a + B = 0 mod q.
struct CoeffSet {
    std::vector<Int> A, B;
};

// Difference coefficients for candidate minimum index i, scaled by the
// inverse of 2^delta_l: entry j-1 holds C_{i,j} (j = 1..n), where index
// j <= i draws from A_{j-1} and j > i from A_j.
struct ShiftedCoeffs {
    std::size_t i = 0;
    std::vector<Int> C, D;
};

enum class Reduction { Lll, Bkz };

struct AttackOptions {
    Reduction reduction = Reduction::Bkz;
    int block_size = 8;
    Rat delta_lll = Rat(99, 100);
    std::optional<std::size_t> min_index_hint;
    std::uint64_t node_budget = 1000000000ULL;
    unsigned workers = 0;  // enumeration workers; 0 = hardware concurrency
};

enum class AttackOutcome { FoundKey, KeyNotFound, BudgetExhausted };

struct IndexReport {
    std::size_t index = 0;
    bool hyp2_holds = false;
    double hyp2_margin = 0.0;
    double ball_count_bound = 0.0;  // cardinality forecast for the ball
    std::uint64_t points = 0;
    std::uint64_t nodes = 0;
    double wall_ms = 0.0;
};

struct AttackReport {
    AttackOutcome outcome = AttackOutcome::KeyNotFound;
    std::optional<Int> key;
    std::size_t i_star = 0;  // index that succeeded (or exhausted budget)
    Int radius_sq;
    std::vector<IndexReport> per_index;

    bool success() const { return outcome == AttackOutcome::FoundKey; }
};

CoeffSet compute_coeffs(const AttackInstance& inst);

ShiftedCoeffs shifted_coeffs(const CoeffSet& coeffs, std::size_t i, unsigned delta_l,
                             const Int& q);

// (n+1) x (n+1) row basis: diag(2^{delta+1} q) over the first n rows, last
// row (2^{delta+1} C_1, ..., 2^{delta+1} C_n, 1).
Basis build_lattice(const std::vector<Int>& C, const Int& q, unsigned delta);

// (2^{delta+1} D_1 + 2^ell, ..., 2^{delta+1} D_n + 2^ell, 0)
std::vector<Int> build_target(const std::vector<Int>& D, unsigned delta, unsigned ell);

// R^2 = 2^{2 ell} (n+1), kept squared so distance tests stay in integers.
Int radius_sq(unsigned ell, std::size_t n);

struct Hypothesis2 {
    bool holds = false;   // true certifies the bound; false is inconclusive
    double margin = 0.0;  // certified lower bound / required threshold
};

// Compares the certified GSO lower bound on s(L) against
// (1/2) (2^{delta+1} q)^{n/(n+1)}, exactly (both sides raised to 2(n+1)).
Hypothesis2 check_hypothesis2(const GSOData& gso, const Int& q, unsigned delta,
                              std::size_t n);

// Candidate keys (-u_last mod q) of enumerated points, deduplicated in
// first-seen order.
std::vector<Int> extract_candidates(const std::vector<EnumPoint>& points, const Int& q);

bool verify_candidate(const SchemeParams& params, const PublicKey& pub, const Int& a);

// Full pipeline: per candidate minimum index, build/reduce the lattice,
// exhaustively enumerate the R-ball around the target, and test candidate
// keys against the public key. Stops at the first verified key.
AttackReport recover_key(const AttackInstance& inst, const AttackOptions& opts = {});

}  // namespace latkey
