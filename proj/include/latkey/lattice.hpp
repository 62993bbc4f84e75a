#pragma once

#include "latkey/bignum.hpp"

#include <vector>

namespace latkey {

using Matrix = std::vector<std::vector<Int>>;

// Square integer row basis of a full-rank lattice.
struct Basis {
    Matrix rows;

    Basis() = default;
    explicit Basis(Matrix r) : rows(std::move(r)) {}

    std::size_t dim() const { return rows.size(); }
};

// Exact Gram-Schmidt data: mu[i] holds the i coefficients mu_{i,j} (j < i),
// norms_sq[i] = ||b*_i||^2. Everything is an exact rational; no rounding
// happens anywhere in the reduction stack.
struct GSOData {
    std::vector<std::vector<Rat>> mu;
    std::vector<Rat> norms_sq;

    std::size_t dim() const { return norms_sq.size(); }
};

GSOData gso(const Basis& basis);

struct ReducedBasis {
    Basis basis;
    Matrix transform;  // unimodular U with basis = U * input
    GSOData gso;
};

// LLL reduction (exact integer variant working on the scaled Gram-Schmidt
// data). Output spans the same lattice, is size-reduced and satisfies the
// Lovasz condition with parameter `delta`; both are re-checked exactly
// before returning.
ReducedBasis lll_reduce(const Basis& basis, const Rat& delta = Rat(99, 100));

// Block-Korkine-Zolotarev: LLL plus exact SVP enumeration per block,
// iterated until a full tour makes no insertion. At the fixpoint the first
// vector of every local block is a shortest vector of the projected block
// lattice.
ReducedBasis bkz_reduce(const Basis& basis, int block_size,
                        const Rat& delta = Rat(99, 100));

// |det| by fraction-free (Bareiss) elimination.
Int det_abs(const Basis& basis);

// min_i ||b*_i||^2 — a certified lower bound for s(L)^2.
Rat sv_lower_bound_sq(const GSOData& gso);
double sv_lower_bound(const GSOData& gso);

// sqrt(d / 2*pi*e) * det^(1/d); diagnostic estimate only.
double gaussian_heuristic(const Basis& basis);

namespace detail {

// Scaled integral Gram-Schmidt state (lam[i][j] = mu_{i,j} * d[j],
// d[i] = det of the Gram matrix of rows 0..i). All entries stay integral
// throughout LLL; this is what makes exact reduction affordable.
struct IntegralGso {
    Matrix lam;
    std::vector<Int> d;

    const Int& dm(int i) const {
        static const Int one = 1;
        return i < 0 ? one : d[static_cast<std::size_t>(i)];
    }
};

// Computes lam/d rows [from, dim) from scratch. Throws on rank deficiency.
void compute_integral_gso(const Matrix& rows, IntegralGso& state, std::size_t from);

GSOData gso_from_integral(const IntegralGso& state);

// Exact GSO coordinates of an arbitrary integer vector v against the basis:
// returns num[j] with <v, b*_j> / ||b*_j||^2 = num[j] / d[j].
std::vector<Int> target_gso_coords(const Matrix& rows, const IntegralGso& state,
                                   const std::vector<Int>& v);

}  // namespace detail

}  // namespace latkey
