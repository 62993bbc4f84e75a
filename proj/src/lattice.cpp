#include "latkey/lattice.hpp"

#include "latkey/detail/zigzag.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace latkey {

namespace detail {

void compute_integral_gso(const Matrix& rows, IntegralGso& state, std::size_t from) {
    const std::size_t dim = rows.size();
    state.lam.resize(dim);
    state.d.resize(dim);
    for (std::size_t i = from; i < dim; ++i) {
        state.lam[i].assign(i, 0);
        for (std::size_t j = 0; j <= i; ++j) {
            Int u = 0;
            for (std::size_t c = 0; c < rows[i].size(); ++c) u += rows[i][c] * rows[j][c];
            for (std::size_t r = 0; r < j; ++r) {
                u = state.d[r] * u - state.lam[i][r] * state.lam[j][r];
                if (r > 0) mpz_divexact(u.get_mpz_t(), u.get_mpz_t(), state.d[r - 1].get_mpz_t());
            }
            if (j < i) {
                state.lam[i][j] = u;
            } else {
                if (u <= 0) throw std::invalid_argument("lattice: basis is rank-deficient");
                state.d[i] = u;
            }
        }
    }
}

GSOData gso_from_integral(const IntegralGso& state) {
    const std::size_t dim = state.d.size();
    GSOData out;
    out.mu.resize(dim);
    out.norms_sq.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
        out.mu[i].resize(i);
        for (std::size_t j = 0; j < i; ++j) {
            Rat m(state.lam[i][j], state.d[j]);
            m.canonicalize();
            out.mu[i][j] = m;
        }
        Rat b(state.d[i], state.dm(static_cast<int>(i) - 1));
        b.canonicalize();
        out.norms_sq[i] = b;
    }
    return out;
}

std::vector<Int> target_gso_coords(const Matrix& rows, const IntegralGso& state,
                                   const std::vector<Int>& v) {
    const std::size_t dim = rows.size();
    std::vector<Int> lamv(dim);
    for (std::size_t j = 0; j < dim; ++j) {
        Int u = 0;
        for (std::size_t c = 0; c < v.size(); ++c) u += v[c] * rows[j][c];
        for (std::size_t r = 0; r < j; ++r) {
            u = state.d[r] * u - lamv[r] * state.lam[j][r];
            if (r > 0) mpz_divexact(u.get_mpz_t(), u.get_mpz_t(), state.d[r - 1].get_mpz_t());
        }
        lamv[j] = u;
    }
    return lamv;
}

}  // namespace detail

namespace {

using detail::IntegralGso;

// Exact divide helper for the scaled GSO update formulas.
Int exact_div(const Int& num, const Int& den) {
    Int q;
    mpz_divexact(q.get_mpz_t(), num.get_mpz_t(), den.get_mpz_t());
    return q;
}

struct RedState {
    Matrix rows;
    Matrix transform;
    IntegralGso g;
    Int delta_num, delta_den;

    std::size_t dim() const { return rows.size(); }
};

// Size-reduce row k against row l (|mu_{k,l}| <= 1/2 afterwards).
void size_reduce_pair(RedState& st, std::size_t k, std::size_t l) {
    Int two_lam = 2 * st.g.lam[k][l];
    if (two_lam > st.g.d[l] || -two_lam > st.g.d[l]) {
        Int q = div_round_nearest(st.g.lam[k][l], st.g.d[l]);
        for (std::size_t c = 0; c < st.rows[k].size(); ++c) st.rows[k][c] -= q * st.rows[l][c];
        for (std::size_t c = 0; c < st.transform[k].size(); ++c)
            st.transform[k][c] -= q * st.transform[l][c];
        for (std::size_t j = 0; j < l; ++j) st.g.lam[k][j] -= q * st.g.lam[l][j];
        st.g.lam[k][l] -= q * st.g.d[l];
    }
}

// Exchange rows k-1 and k, updating lam/d in place (Cohen's SWAPI).
void swap_rows(RedState& st, std::size_t k) {
    std::swap(st.rows[k], st.rows[k - 1]);
    std::swap(st.transform[k], st.transform[k - 1]);
    for (std::size_t j = 0; j + 1 < k; ++j) std::swap(st.g.lam[k][j], st.g.lam[k - 1][j]);

    const Int lam = st.g.lam[k][k - 1];
    const Int b = exact_div(st.g.dm(static_cast<int>(k) - 2) * st.g.d[k] + lam * lam,
                            st.g.d[k - 1]);
    for (std::size_t i = k + 1; i < st.dim(); ++i) {
        Int t = st.g.lam[i][k];
        st.g.lam[i][k] = exact_div(st.g.d[k] * st.g.lam[i][k - 1] - lam * t, st.g.d[k - 1]);
        st.g.lam[i][k - 1] = exact_div(b * t + lam * st.g.lam[i][k], st.g.d[k]);
    }
    st.g.d[k - 1] = b;
}

bool lovasz_fails(const RedState& st, std::size_t k) {
    const Int& lam = st.g.lam[k][k - 1];
    Int lhs = st.delta_den * (st.g.dm(static_cast<int>(k) - 2) * st.g.d[k] + lam * lam);
    Int rhs = st.delta_num * st.g.d[k - 1] * st.g.d[k - 1];
    return lhs < rhs;
}

// Main LLL loop over rows [start, dim). Rows below `start` must already be
// mutually reduced (true for a fresh basis with start=1 and after BKZ
// insertions, which leave the prefix untouched).
void lll_loop(RedState& st, std::size_t start) {
    std::size_t k = std::max<std::size_t>(start, 1);
    while (k < st.dim()) {
        size_reduce_pair(st, k, k - 1);
        if (lovasz_fails(st, k)) {
            swap_rows(st, k);
            k = std::max<std::size_t>(k - 1, 1);
        } else {
            for (std::size_t l = k - 1; l-- > 0;) size_reduce_pair(st, k, l);
            ++k;
        }
    }
}

// Exact self-check of the reduction guarantees; a violation means a bug in
// the update formulas, not bad input.
void check_reduced(const RedState& st, const Int& gram_det_before) {
    const std::size_t dim = st.dim();
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < i; ++j) {
            Int two_lam = 2 * st.g.lam[i][j];
            if (two_lam > st.g.d[j] || -two_lam > st.g.d[j])
                throw std::logic_error("lattice: size reduction violated");
        }
    for (std::size_t k = 1; k < dim; ++k) {
        const Int& lam = st.g.lam[k][k - 1];
        Int lhs = st.delta_den * (st.g.dm(static_cast<int>(k) - 2) * st.g.d[k] + lam * lam);
        if (lhs < st.delta_num * st.g.d[k - 1] * st.g.d[k - 1])
            throw std::logic_error("lattice: Lovasz condition violated");
        if (4 * st.delta_num >= 3 * st.delta_den) {
            // 4||b*_k||^2 >= 2||b*_{k-1}||^2, guaranteed for delta >= 3/4
            Int chain_lhs = 2 * st.g.d[k] * st.g.dm(static_cast<int>(k) - 2);
            if (chain_lhs < st.g.d[k - 1] * st.g.d[k - 1])
                throw std::logic_error("lattice: GSO chain inequality violated");
        }
    }
    if (st.g.d.back() != gram_det_before)
        throw std::logic_error("lattice: Gram determinant changed under reduction");
}

RedState make_state(const Basis& basis, const Rat& delta) {
    if (basis.dim() == 0) throw std::invalid_argument("lattice: empty basis");
    for (const auto& row : basis.rows)
        if (row.size() != basis.dim())
            throw std::invalid_argument("lattice: basis must be square");
    Rat d = delta;
    d.canonicalize();
    if (4 * d.get_num() <= d.get_den() || d.get_num() > d.get_den())
        throw std::invalid_argument("lattice: delta must lie in (1/4, 1]");

    RedState st;
    st.rows = basis.rows;
    st.delta_num = d.get_num();
    st.delta_den = d.get_den();
    st.transform.assign(basis.dim(), std::vector<Int>(basis.dim(), 0));
    for (std::size_t i = 0; i < basis.dim(); ++i) st.transform[i][i] = 1;
    detail::compute_integral_gso(st.rows, st.g, 0);
    return st;
}

ReducedBasis finish(RedState&& st) {
    ReducedBasis out;
    out.basis = Basis(std::move(st.rows));
    out.transform = std::move(st.transform);
    out.gso = detail::gso_from_integral(st.g);
    return out;
}

// ---- exact SVP oracle for one BKZ block ----

struct SvpCandidate {
    std::vector<long> coeffs;  // x_kappa..x_end
};

// Collects every nonzero coefficient vector whose *floating* projected norm
// passes radius*(1+2^-20); the caller re-evaluates candidates exactly. The
// slack guarantees no true candidate is pruned by rounding.
std::vector<SvpCandidate> block_enum_candidates(const RedState& st, std::size_t kappa,
                                                std::size_t end) {
    const int m = static_cast<int>(end - kappa + 1);
    std::vector<std::vector<long double>> mu(m, std::vector<long double>(m, 0.0L));
    std::vector<long double> bstar(m);
    for (int i = 0; i < m; ++i) {
        std::size_t gi = kappa + i;
        bstar[i] = to_ld_ratio(st.g.d[gi], st.g.dm(static_cast<int>(gi) - 1));
        for (int j = 0; j < i; ++j)
            mu[i][j] = to_ld_ratio(st.g.lam[gi][kappa + j], st.g.d[kappa + j]);
    }
    const long double radius =
        to_ld_ratio(st.g.d[kappa], st.g.dm(static_cast<int>(kappa) - 1)) *
        (1.0L + 0x1p-20L);

    std::vector<SvpCandidate> found;
    std::vector<long> x(m, 0);
    std::vector<long double> center(m, 0.0L), partial(m + 1, 0.0L);
    std::vector<detail::ZigzagLevel> zig(m);

    auto center_at = [&](int lvl) {
        long double c = 0.0L;
        for (int t = lvl + 1; t < m; ++t) c -= mu[t][lvl] * static_cast<long double>(x[t]);
        return c;
    };

    int lvl = m - 1;
    center[lvl] = center_at(lvl);
    zig[lvl].reset(center[lvl]);
    for (;;) {
        x[lvl] = static_cast<long>(zig[lvl].value());
        long double y = static_cast<long double>(x[lvl]) - center[lvl];
        long double p = partial[lvl + 1] + y * y * bstar[lvl];
        bool inside = p <= radius;
        if (inside && lvl > 0) {
            partial[lvl] = p;
            --lvl;
            center[lvl] = center_at(lvl);
            zig[lvl].reset(center[lvl]);
            continue;
        }
        if (inside) {
            bool nonzero = false;
            for (auto v : x)
                if (v != 0) nonzero = true;
            if (nonzero) found.push_back(SvpCandidate{x});
        } else {
            zig[lvl].kill_current_side();
        }
        while (!zig[lvl].advance()) {
            ++lvl;
            if (lvl >= m) return found;
        }
    }
}

struct BlockSvp {
    bool improves = false;
    std::vector<Int> coeffs;
};

BlockSvp block_svp(const RedState& st, std::size_t kappa, std::size_t end) {
    auto cands = block_enum_candidates(st, kappa, end);
    const int m = static_cast<int>(end - kappa + 1);

    Rat b_kappa(st.g.d[kappa], st.g.dm(static_cast<int>(kappa) - 1));
    b_kappa.canonicalize();

    BlockSvp best;
    Rat best_norm = b_kappa;
    std::vector<Rat> y(m);
    for (const auto& cand : cands) {
        for (int j = 0; j < m; ++j) {
            Rat acc = cand.coeffs[j];
            for (int t = j + 1; t < m; ++t) {
                Rat mu_exact(st.g.lam[kappa + t][kappa + j], st.g.d[kappa + j]);
                mu_exact.canonicalize();
                acc += mu_exact * cand.coeffs[t];
            }
            y[j] = acc;
        }
        Rat norm = 0;
        for (int j = 0; j < m; ++j) {
            Rat b(st.g.d[kappa + j], st.g.dm(static_cast<int>(kappa + j) - 1));
            b.canonicalize();
            norm += y[j] * y[j] * b;
        }
        bool better = norm < best_norm;
        if (!better && best.improves && norm == best_norm) {
            // deterministic tie-break: lexicographically smallest coefficients
            std::vector<Int> as_int(cand.coeffs.begin(), cand.coeffs.end());
            better = as_int < best.coeffs;
        }
        if (better) {
            best.improves = true;
            best_norm = norm;
            best.coeffs.assign(cand.coeffs.begin(), cand.coeffs.end());
        }
    }
    return best;
}

// Extends the primitive vector x to a unimodular matrix whose first row is
// x, by mirroring the column operations that reduce x to e_0.
Matrix unimodular_completion(std::vector<Int> xc) {
    const std::size_t m = xc.size();
    Matrix mat(m, std::vector<Int>(m, 0));
    for (std::size_t i = 0; i < m; ++i) mat[i][i] = 1;

    for (std::size_t i = 1; i < m; ++i) {
        if (xc[i] == 0) continue;
        Int g, s, t;
        mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), xc[0].get_mpz_t(),
                   xc[i].get_mpz_t());
        Int a0 = exact_div(xc[0], g), ai = exact_div(xc[i], g);
        for (std::size_t c = 0; c < m; ++c) {
            Int r0 = a0 * mat[0][c] + ai * mat[i][c];
            Int ri = -t * mat[0][c] + s * mat[i][c];
            mat[0][c] = r0;
            mat[i][c] = ri;
        }
        xc[0] = g;
        xc[i] = 0;
    }
    if (xc[0] == -1) {
        for (std::size_t c = 0; c < m; ++c) mat[0][c] = -mat[0][c];
        xc[0] = 1;
    }
    if (xc[0] != 1) throw std::logic_error("lattice: SVP coefficient vector not primitive");
    return mat;
}

void apply_block_transform(RedState& st, std::size_t kappa, const Matrix& m) {
    const std::size_t bs = m.size();
    auto mul_block = [&](Matrix& target) {
        Matrix fresh(bs, std::vector<Int>(target[0].size(), 0));
        for (std::size_t i = 0; i < bs; ++i)
            for (std::size_t j = 0; j < bs; ++j) {
                if (m[i][j] == 0) continue;
                for (std::size_t c = 0; c < target[0].size(); ++c)
                    fresh[i][c] += m[i][j] * target[kappa + j][c];
            }
        for (std::size_t i = 0; i < bs; ++i) target[kappa + i] = std::move(fresh[i]);
    };
    mul_block(st.rows);
    mul_block(st.transform);
}

}  // namespace

GSOData gso(const Basis& basis) {
    if (basis.dim() == 0) throw std::invalid_argument("gso: empty basis");
    for (const auto& row : basis.rows)
        if (row.size() != basis.dim()) throw std::invalid_argument("gso: basis must be square");
    IntegralGso state;
    detail::compute_integral_gso(basis.rows, state, 0);
    return detail::gso_from_integral(state);
}

ReducedBasis lll_reduce(const Basis& basis, const Rat& delta) {
    RedState st = make_state(basis, delta);
    const Int gram_det = st.g.d.back();
    lll_loop(st, 1);
    check_reduced(st, gram_det);
    return finish(std::move(st));
}

ReducedBasis bkz_reduce(const Basis& basis, int block_size, const Rat& delta) {
    if (block_size < 2 || static_cast<std::size_t>(block_size) > basis.dim())
        throw std::invalid_argument("bkz_reduce: block size out of range [2, dim]");
    RedState st = make_state(basis, delta);
    const Int gram_det = st.g.d.back();
    lll_loop(st, 1);

    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t kappa = 0; kappa + 1 < st.dim(); ++kappa) {
            std::size_t end = std::min(kappa + static_cast<std::size_t>(block_size) - 1,
                                       st.dim() - 1);
            BlockSvp cand = block_svp(st, kappa, end);
            if (!cand.improves) continue;
            apply_block_transform(st, kappa, unimodular_completion(cand.coeffs));
            detail::compute_integral_gso(st.rows, st.g, kappa);
            lll_loop(st, kappa);
            changed = true;
        }
    }
    check_reduced(st, gram_det);
    return finish(std::move(st));
}

Int det_abs(const Basis& basis) {
    const std::size_t dim = basis.dim();
    for (const auto& row : basis.rows)
        if (row.size() != dim) throw std::invalid_argument("det_abs: basis must be square");
    Matrix m = basis.rows;
    Int prev = 1;
    for (std::size_t k = 0; k + 1 < dim; ++k) {
        std::size_t pivot = k;
        while (pivot < dim && m[pivot][k] == 0) ++pivot;
        if (pivot == dim) return 0;
        if (pivot != k) std::swap(m[pivot], m[k]);
        for (std::size_t i = k + 1; i < dim; ++i) {
            for (std::size_t j = k + 1; j < dim; ++j) {
                Int num = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                m[i][j] = exact_div(num, prev);
            }
            m[i][k] = 0;
        }
        prev = m[k][k];
    }
    return abs(m[dim - 1][dim - 1]);
}

Rat sv_lower_bound_sq(const GSOData& gso) {
    if (gso.dim() == 0) throw std::invalid_argument("sv_lower_bound: empty GSO");
    Rat best = gso.norms_sq[0];
    for (const auto& b : gso.norms_sq)
        if (b < best) best = b;
    return best;
}

double sv_lower_bound(const GSOData& gso) {
    return std::sqrt(static_cast<double>(to_ld(sv_lower_bound_sq(gso))));
}

double gaussian_heuristic(const Basis& basis) {
    const double d = static_cast<double>(basis.dim());
    Int det = det_abs(basis);
    if (det == 0) throw std::invalid_argument("gaussian_heuristic: rank-deficient basis");
    double root = std::exp2(log2_of(det) / d);
    return std::sqrt(d / (2.0 * std::numbers::pi * std::numbers::e)) * root;
}

}  // namespace latkey
