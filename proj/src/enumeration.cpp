#include "latkey/enumeration.hpp"

#include "latkey/detail/zigzag.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstring>
#include <thread>

namespace latkey {

namespace {

using detail::ZigzagLevel;

constexpr long double kInflate = 1.0L + 0x1p-20L;
constexpr long kCoeffCap = (1L << 31);  // keeps x^2 inside one limb
constexpr unsigned kMaxLanes = 8;

// ---- lane conversions (two's complement, little-endian limbs) ----

void int_to_lanes(const Int& x, std::uint64_t* out, unsigned w) {
    std::fill(out, out + w, 0);
    Int mag = abs(x);
    std::size_t count = 0;
    mpz_export(out, &count, -1, sizeof(std::uint64_t), 0, 0, mag.get_mpz_t());
    if (count > w) throw std::logic_error("enumeration: lane overflow in export");
    if (sgn(x) < 0) {
        std::uint64_t carry = 1;
        for (unsigned i = 0; i < w; ++i) {
            std::uint64_t t = ~out[i] + carry;
            carry = (carry != 0 && t == 0) ? 1 : 0;
            out[i] = t;
        }
    }
}

// ---- query setup ----

struct Setup {
    std::size_t dim = 0;
    Matrix rows;
    std::vector<Int> target;
    Int radius_sq;

    std::vector<std::vector<long double>> mu;
    std::vector<long double> bstar;
    std::vector<long double> vc;
    long double radius_work = 0;

    // exact quadratic-form data (na = 0 selects the big-int fallback):
    // squared distances evolve as A <- A + 2x*IP + x^2*G along the search
    // path, so the per-point exact check never touches full coordinates.
    unsigned na = 0;
    std::vector<std::uint64_t> gram;       // d*d lanes of na limbs
    std::vector<std::uint64_t> ip_root;    // d lanes: <0 - v, row_j>
    std::vector<std::uint64_t> a_root;     // ||v||^2
    std::vector<std::uint64_t> rsq_lanes;  // R^2
    Int first_scale = 1, last_scale = 1;    // power-of-two column divisors
    unsigned wc = 0;                        // column-lane limbs (<= na)
    std::vector<std::uint64_t> first_rows;  // d lanes: rows[i][0] / first_scale
    std::vector<std::uint64_t> first_root;  // -target[0] / first_scale
    std::vector<std::uint64_t> last_rows;   // d lanes: rows[i].back() / last_scale
    std::vector<std::uint64_t> last_root;   // -target.back() / last_scale

    const std::uint64_t* gram_at(std::size_t i, std::size_t j) const {
        return gram.data() + (i * dim + j) * na;
    }
};

Setup build_setup(const BallQuery& query) {
    Setup su;
    su.dim = query.basis.dim();
    if (su.dim == 0) throw std::invalid_argument("enumerate: empty basis");
    for (const auto& r : query.basis.rows)
        if (r.size() != su.dim) throw std::invalid_argument("enumerate: basis must be square");
    if (query.target.size() != su.dim)
        throw std::invalid_argument("enumerate: target dimension mismatch");
    if (query.radius_sq < 0) throw std::invalid_argument("enumerate: negative radius");
    if (!query.gso.norms_sq.empty() && query.gso.dim() != su.dim)
        throw std::invalid_argument("enumerate: gso does not match basis");

    su.rows = query.basis.rows;
    su.target = query.target;
    su.radius_sq = query.radius_sq;

    detail::IntegralGso ig;
    detail::compute_integral_gso(su.rows, ig, 0);
    auto lamv = detail::target_gso_coords(su.rows, ig, su.target);

    const std::size_t d = su.dim;
    su.mu.assign(d, {});
    su.bstar.resize(d);
    su.vc.resize(d);
    for (std::size_t i = 0; i < d; ++i) {
        su.mu[i].resize(i);
        for (std::size_t j = 0; j < i; ++j)
            su.mu[i][j] = to_ld_ratio(ig.lam[i][j], ig.d[j]);
        su.bstar[i] = to_ld_ratio(ig.d[i], ig.dm(static_cast<int>(i) - 1));
        su.vc[i] = to_ld_ratio(lamv[i], ig.d[i]);
    }
    su.radius_work = to_ld(su.radius_sq) * kInflate;

    // conservative per-level coefficient bounds, top-down
    std::vector<long double> cb(d, 0.0L);
    bool lanes_ok = true;
    for (std::size_t ii = d; ii-- > 0;) {
        long double reach = sqrtl(su.radius_work / su.bstar[ii]) + fabsl(su.vc[ii]) + 2.0L;
        for (std::size_t t = ii + 1; t < d; ++t) reach += fabsl(su.mu[t][ii]) * cb[t];
        cb[ii] = reach;
        if (!(reach < static_cast<long double>(kCoeffCap))) lanes_ok = false;
    }
    if (!lanes_ok) return su;  // big-int fallback

    // width needed for the exact quadratic recurrences
    Int a_bound = 0, g_max = 0, ip_bound = 0;
    std::vector<Int> rb(d);
    for (std::size_t j = 0; j < d; ++j) {
        rb[j] = abs(su.target[j]);
        for (std::size_t i = 0; i < d; ++i) {
            Int cbi(static_cast<long>(ceill(cb[i])));
            rb[j] += cbi * abs(su.rows[i][j]);
        }
        a_bound += rb[j] * rb[j];
    }
    for (std::size_t i = 0; i < d; ++i) {
        Int row_norm_sq = 0;
        for (std::size_t c = 0; c < d; ++c) row_norm_sq += su.rows[i][c] * su.rows[i][c];
        g_max = std::max(g_max, row_norm_sq);
    }
    Int g_root_hint;
    {
        Int s_bound;
        mpz_sqrt(s_bound.get_mpz_t(), a_bound.get_mpz_t());
        mpz_sqrt(g_root_hint.get_mpz_t(), g_max.get_mpz_t());
        ip_bound = (s_bound + 1) * (g_root_hint + 1);
    }
    Int cb_max = 0;
    for (std::size_t i = 0; i < d; ++i)
        cb_max = std::max(cb_max, Int(static_cast<long>(ceill(cb[i]))));
    Int delta_bound = 2 * ip_bound + 2 * (cb_max + 2) * g_max;  // leaf D second differences
    unsigned bits = std::max({bit_length(a_bound) + 1, bit_length(delta_bound) + 1,
                              bit_length(g_max) + 2, bit_length(su.radius_sq)}) +
                    2;
    // The residual S_L - v decomposes over the GSO as clamped projected
    // coefficients plus the fixed target offsets, which usually bounds the
    // running squared distances far more tightly than the coefficient box.
    {
        long double a_ld = su.radius_work;
        for (std::size_t j = 0; j < d; ++j) {
            long double coef = fabsl(su.vc[j]) + 1.0L;
            for (std::size_t t = j + 1; t < d; ++t) coef += fabsl(su.mu[t][j]) * cb[t];
            a_ld += coef * coef * su.bstar[j];
        }
        a_ld *= 16.0L;  // safety margin
        long double ip_ld = sqrtl(a_ld) * (to_ld(g_root_hint) + 1.0L);
        long double dl_ld = 2.0L * ip_ld + 2.0L * (to_ld(cb_max) + 2.0L) * to_ld(g_max);
        long double need = fmaxl(fmaxl(a_ld, 4.0L * dl_ld), 4.0L * to_ld(g_max));
        need = fmaxl(need, to_ld(su.radius_sq));
        unsigned tight_bits = static_cast<unsigned>(ceill(log2l(need))) + 3;
        if (tight_bits < bits) bits = tight_bits;
    }
    unsigned na = (bits + 63) / 64;
    if (na > kMaxLanes) return su;  // fallback
    su.na = na;

    su.gram.assign(d * d * na, 0);
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
            Int g = 0;
            for (std::size_t c = 0; c < d; ++c) g += su.rows[i][c] * su.rows[j][c];
            int_to_lanes(g, su.gram.data() + (i * d + j) * na, na);
        }
    su.ip_root.assign(d * na, 0);
    for (std::size_t j = 0; j < d; ++j) {
        Int ip = 0;
        for (std::size_t c = 0; c < d; ++c) ip -= su.target[c] * su.rows[j][c];
        int_to_lanes(ip, su.ip_root.data() + j * na, na);
    }
    su.a_root.assign(na, 0);
    Int vsq = 0;
    for (std::size_t c = 0; c < d; ++c) vsq += su.target[c] * su.target[c];
    int_to_lanes(vsq, su.a_root.data(), na);
    su.rsq_lanes.assign(na, 0);
    int_to_lanes(su.radius_sq, su.rsq_lanes.data(), na);

    // first/last coordinate residual columns, scaled by power-of-two gcds
    // and stored at their own (narrow) limb width
    {
        unsigned wc_bits = 0;
        for (std::size_t col : {std::size_t(0), d - 1})
            wc_bits = std::max(wc_bits, bit_length(rb[col]) + 2);
        su.wc = std::min((wc_bits + 63) / 64, na);
    }
    auto column_lanes = [&](std::size_t col, Int& scale, std::vector<std::uint64_t>& rows_l,
                            std::vector<std::uint64_t>& root_l) {
        Int g = abs(su.target[col]);
        for (std::size_t i = 0; i < d; ++i)
            mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), su.rows[i][col].get_mpz_t());
        if (g != 0) scale = pow2(static_cast<unsigned>(mpz_scan1(g.get_mpz_t(), 0)));
        rows_l.assign(d * su.wc, 0);
        for (std::size_t i = 0; i < d; ++i) {
            Int scaled;
            mpz_divexact(scaled.get_mpz_t(), su.rows[i][col].get_mpz_t(), scale.get_mpz_t());
            int_to_lanes(scaled, rows_l.data() + i * su.wc, su.wc);
        }
        root_l.assign(su.wc, 0);
        Int scaled;
        mpz_divexact(scaled.get_mpz_t(), su.target[col].get_mpz_t(), scale.get_mpz_t());
        int_to_lanes(-scaled, root_l.data(), su.wc);
    };
    column_lanes(d - 1, su.last_scale, su.last_rows, su.last_root);
    column_lanes(0, su.first_scale, su.first_rows, su.first_root);
    return su;
}

StreamInfo stream_info(const Setup& su) {
    StreamInfo info;
    info.dim = su.dim;
    info.lane_limbs = su.wc;
    info.first_scale = su.first_scale;
    info.last_scale = su.last_scale;
    info.target = su.target;
    return info;
}

struct Budget {
    std::uint64_t limit;  // 0 = unlimited
    std::atomic<std::uint64_t> used{0};
    std::atomic<bool> tripped{false};

    explicit Budget(std::uint64_t l) : limit(l) {}

    bool charge(std::uint64_t count) {
        if (limit == 0) return true;
        std::uint64_t total = used.fetch_add(count, std::memory_order_relaxed) + count;
        if (total > limit) {
            tripped.store(true, std::memory_order_relaxed);
            return false;
        }
        return !tripped.load(std::memory_order_relaxed);
    }
};

struct Task {
    std::size_t start_level;
    std::vector<long> prefix_x;
    std::vector<long double> sigma;   // sig row entries [0, start_level]
    std::vector<std::uint64_t> a;     // A at start_level + 1
    std::vector<std::uint64_t> ip;    // IP row at start_level + 1 (start_level+1 lanes)
    std::vector<std::uint64_t> first;  // first-coordinate residual at start_level + 1
    std::vector<std::uint64_t> last;   // last-coordinate residual at start_level + 1
    long double partial;
};

// ---- width-templated engine ----

template <int NA>
struct Engine {
    const Setup& su;
    BallSink& sink;
    Budget& budget;
    const bool full_points;

    std::vector<long double> sig;      // (d+1) x d
    std::vector<long double> partial;  // d+1
    std::vector<long> x;               // d
    std::vector<ZigzagLevel> zig;      // d
    std::vector<std::uint64_t> a;      // (d+1) x NA
    std::vector<std::uint64_t> ip;     // (d+1) x d x NA
    std::vector<std::uint64_t> first;  // (d+1) x NA
    std::vector<std::uint64_t> last;   // (d+1) x NA

    std::uint64_t nodes = 0, points = 0, unflushed = 0;
    bool aborted = false;

    std::vector<Int> full_coeffs, full_residual;  // scratch for the full path

    Engine(const Setup& s, BallSink& snk, Budget& b)
        : su(s), sink(snk), budget(b), full_points(snk.wants_full_points()) {
        const std::size_t d = su.dim;
        sig.assign((d + 1) * d, 0.0L);
        partial.assign(d + 1, 0.0L);
        x.assign(d, 0);
        zig.resize(d);
        a.assign((d + 1) * NA, 0);
        ip.assign((d + 1) * d * NA, 0);
        first.assign((d + 1) * su.wc, 0);
        last.assign((d + 1) * su.wc, 0);
    }

    void init_root() {
        const std::size_t d = su.dim;
        std::memcpy(a.data() + d * NA, su.a_root.data(), NA * 8);
        std::memcpy(ip.data() + (d * d) * NA, su.ip_root.data(), d * NA * 8);
        std::memcpy(first.data() + d * su.wc, su.first_root.data(), su.wc * 8);
        std::memcpy(last.data() + d * su.wc, su.last_root.data(), su.wc * 8);
    }

    long double* sig_row(std::size_t lvl) { return sig.data() + lvl * su.dim; }
    std::uint64_t* a_at(std::size_t lvl) { return a.data() + lvl * NA; }
    std::uint64_t* ip_row(std::size_t lvl) { return ip.data() + lvl * su.dim * NA; }
    std::uint64_t* first_at(std::size_t lvl) { return first.data() + lvl * su.wc; }
    std::uint64_t* last_at(std::size_t lvl) { return last.data() + lvl * su.wc; }

    long double center(std::size_t lvl) { return su.vc[lvl] - sig_row(lvl + 1)[lvl]; }

    // r = b + m * x  (two's complement mod 2^(64*NA), x signed)
    static void addmul(std::uint64_t* __restrict r, const std::uint64_t* __restrict b,
                       const std::uint64_t* __restrict m, long long xv) {
        if (xv >= 0) {
            const std::uint64_t ux = static_cast<std::uint64_t>(xv);
            std::uint64_t carry = 0;
            for (int i = 0; i < NA; ++i) {
                unsigned __int128 t =
                    static_cast<unsigned __int128>(m[i]) * ux + b[i] + carry;
                r[i] = static_cast<std::uint64_t>(t);
                carry = static_cast<std::uint64_t>(t >> 64);
            }
        } else {
            const std::uint64_t ux = static_cast<std::uint64_t>(-xv);
            std::uint64_t borrow = 0;
            for (int i = 0; i < NA; ++i) {
                unsigned __int128 prod =
                    static_cast<unsigned __int128>(m[i]) * ux + borrow;
                std::uint64_t plo = static_cast<std::uint64_t>(prod);
                borrow = static_cast<std::uint64_t>(prod >> 64);
                std::uint64_t s = b[i];
                r[i] = s - plo;
                if (s < plo) ++borrow;
            }
        }
    }

    // r += m * x in place
    static void addmul_inplace(std::uint64_t* __restrict r,
                               const std::uint64_t* __restrict m, long long xv) {
        addmul(r, r, m, xv);
    }

    // runtime-width variant for the narrow column lanes
    static void addmul_w(std::uint64_t* __restrict r, const std::uint64_t* __restrict b,
                         const std::uint64_t* __restrict m, long long xv, unsigned w) {
        if (xv >= 0) {
            const std::uint64_t ux = static_cast<std::uint64_t>(xv);
            std::uint64_t carry = 0;
            for (unsigned i = 0; i < w; ++i) {
                unsigned __int128 t = static_cast<unsigned __int128>(m[i]) * ux + b[i] + carry;
                r[i] = static_cast<std::uint64_t>(t);
                carry = static_cast<std::uint64_t>(t >> 64);
            }
        } else {
            const std::uint64_t ux = static_cast<std::uint64_t>(-xv);
            std::uint64_t borrow = 0;
            for (unsigned i = 0; i < w; ++i) {
                unsigned __int128 prod = static_cast<unsigned __int128>(m[i]) * ux + borrow;
                std::uint64_t plo = static_cast<std::uint64_t>(prod);
                borrow = static_cast<std::uint64_t>(prod >> 64);
                std::uint64_t v = b[i];
                r[i] = v - plo;
                if (v < plo) ++borrow;
            }
        }
    }

    // descend bookkeeping into level lvl with coefficient xv
    void push_exact(std::size_t lvl, long xv) {
        // A[lvl] = A[lvl+1] + 2x*IP[lvl+1][lvl] + x^2*G[lvl][lvl]
        addmul(a_at(lvl), a_at(lvl + 1), ip_row(lvl + 1) + lvl * NA,
               2LL * static_cast<long long>(xv));
        addmul_inplace(a_at(lvl), su.gram_at(lvl, lvl),
                       static_cast<long long>(xv) * xv);
        addmul_w(first_at(lvl), first_at(lvl + 1), su.first_rows.data() + lvl * su.wc, xv,
                 su.wc);
        addmul_w(last_at(lvl), last_at(lvl + 1), su.last_rows.data() + lvl * su.wc, xv,
                 su.wc);
        if (lvl > 0) {
            const std::uint64_t* src = ip_row(lvl + 1);
            std::uint64_t* dst = ip_row(lvl);
            for (std::size_t j = 0; j < lvl; ++j)
                addmul(dst + j * NA, src + j * NA, su.gram_at(lvl, j), xv);
        }
    }

    void push_sig(std::size_t lvl, long xv) {
        const long double* above = sig_row(lvl + 1);
        long double* here = sig_row(lvl);
        const long double xld = static_cast<long double>(xv);
        const long double* murow = su.mu[lvl].data();
        for (std::size_t k = 0; k < lvl; ++k) here[k] = above[k] + murow[k] * xld;
    }

    // exact D <= R^2 (both nonnegative; lanes have headroom so the top bit
    // is never set for true values)
    bool dist_ok(const std::uint64_t* d) const {
        for (int i = NA; i-- > 0;) {
            if (d[i] != su.rsq_lanes[i]) return d[i] < su.rsq_lanes[i];
        }
        return true;
    }

    bool charge_node() {
        ++nodes;
        if (++unflushed >= 1024) {
            if (!budget.charge(unflushed)) {
                aborted = true;
                return false;
            }
            unflushed = 0;
        }
        return true;
    }

    void flush_budget() {
        if (unflushed) {
            if (!budget.charge(unflushed)) aborted = true;
            unflushed = 0;
        }
    }

    void emit(long leaf_x) {
        ++points;
        x[0] = leaf_x;
        if (!full_points) {
            std::uint64_t firstres[NA], lastres[NA];
            addmul_w(firstres, first_at(1), su.first_rows.data(), leaf_x, su.wc);
            addmul_w(lastres, last_at(1), su.last_rows.data(), leaf_x, su.wc);
            sink.on_point(x.data(), firstres, lastres);
            return;
        }
        const std::size_t d = su.dim;
        full_coeffs.assign(x.begin(), x.end());
        full_residual.assign(d, 0);
        for (std::size_t c = 0; c < d; ++c) {
            Int acc = -su.target[c];
            for (std::size_t i = 0; i < d; ++i) acc += full_coeffs[i] * su.rows[i][c];
            full_residual[c] = acc;
        }
        sink.on_point_full(full_coeffs, full_residual);
    }

    // Leaf sweep. With everything above level 0 fixed, the exact squared
    // distance is the integer quadratic D(x) = A1 + 2x*B + x^2*C, so
    // successive candidates differ by a running first difference and the
    // constant 2C. The whole inner loop is additions and compares; a side
    // dies at its first D > R^2 (D is monotone past the vertex), and the
    // rounded float center only picks the starting point.
    bool process_leaf_level() {
        const long double c = center(0);
        const long x0 = static_cast<long>(llroundl(c));
        const std::uint64_t* b_lane = ip_row(1);  // IP[1][0]
        const std::uint64_t* c_lane = su.gram_at(0, 0);

        std::uint64_t d_up[NA], d_dn[NA], step_up[NA], step_dn[NA], twoc[NA];
        // D(x0)
        addmul(d_up, a_at(1), b_lane, 2LL * x0);
        addmul_inplace(d_up, c_lane, static_cast<long long>(x0) * x0);
        std::memcpy(d_dn, d_up, NA * 8);
        // first differences: up = D(x0+1)-D(x0), dn = D(x0-1)-D(x0); their
        // sum is 2C, and each grows by 2C per further step outward
        for (int i = 0; i < NA; ++i) twoc[i] = 0;
        addmul_inplace(twoc, c_lane, 2);
        for (int i = 0; i < NA; ++i) step_up[i] = 0;
        addmul_inplace(step_up, b_lane, 2);
        addmul_inplace(step_up, c_lane, 2LL * x0 + 1);
        sub_lanes(step_dn, twoc, step_up);

        bool up_dead = false, dn_dead = false;
        long off_up = 0, off_dn = 0;  // last probed offset per side
        // offset 0; even if it fails, each side still probes once (the real
        // vertex may sit a hair past the rounded center)
        if (!charge_node()) return false;
        if (dist_ok(d_up)) emit(x0);
        bool take_dn = static_cast<long double>(x0) >= c;
        for (;;) {
            if (up_dead && dn_dead) return true;
            bool dn_turn = dn_dead ? false : (up_dead ? true : take_dn);
            take_dn = !dn_turn;
            if (!charge_node()) return false;
            if (dn_turn) {
                add_lanes(d_dn, step_dn);
                add_lanes(step_dn, twoc);
                ++off_dn;
                if (dist_ok(d_dn))
                    emit(x0 - off_dn);
                else
                    dn_dead = true;
            } else {
                add_lanes(d_up, step_up);
                add_lanes(step_up, twoc);
                ++off_up;
                if (dist_ok(d_up))
                    emit(x0 + off_up);
                else
                    up_dead = true;
            }
        }
    }

    static void add_lanes(std::uint64_t* __restrict r, const std::uint64_t* __restrict b) {
        std::uint64_t carry = 0;
        for (int i = 0; i < NA; ++i) {
            unsigned __int128 t = static_cast<unsigned __int128>(r[i]) + b[i] + carry;
            r[i] = static_cast<std::uint64_t>(t);
            carry = static_cast<std::uint64_t>(t >> 64);
        }
    }

    // r = a - b over two's-complement lanes
    static void sub_lanes(std::uint64_t* __restrict r, const std::uint64_t* __restrict a,
                          const std::uint64_t* __restrict b) {
        std::uint64_t borrow = 0;
        for (int i = 0; i < NA; ++i) {
            unsigned __int128 t =
                static_cast<unsigned __int128>(a[i]) - b[i] - borrow;
            r[i] = static_cast<std::uint64_t>(t);
            borrow = static_cast<std::uint64_t>(t >> 64) & 1;
        }
    }

    void run(std::size_t start) {
        std::size_t lvl = start;
        if (lvl == 0) {
            process_leaf_level();
            flush_budget();
            return;
        }
        zig[lvl].reset(center(lvl));
        for (;;) {
            if (!charge_node()) return;
            long xv = static_cast<long>(zig[lvl].value());
            x[lvl] = xv;
            long double y = static_cast<long double>(xv) - center(lvl);
            long double p = partial[lvl + 1] + y * y * su.bstar[lvl];
            if (p <= su.radius_work) {
                partial[lvl] = p;
                push_exact(lvl, xv);
                push_sig(lvl, xv);
                if (lvl == 1) {
                    if (!process_leaf_level()) return;
                } else {
                    --lvl;
                    zig[lvl].reset(center(lvl));
                    continue;
                }
            } else {
                zig[lvl].kill_current_side();
            }
            while (!zig[lvl].advance()) {
                ++lvl;
                if (lvl > start) {
                    flush_budget();
                    return;
                }
            }
        }
    }

    std::vector<Task> generate_tasks(std::size_t fixed_levels) {
        std::vector<Task> tasks;
        const std::size_t d = su.dim;
        const std::size_t cutoff = d - fixed_levels;  // >= 1
        std::size_t lvl = d - 1;
        zig[lvl].reset(center(lvl));
        for (;;) {
            if (!charge_node()) return tasks;
            long xv = static_cast<long>(zig[lvl].value());
            x[lvl] = xv;
            long double y = static_cast<long double>(xv) - center(lvl);
            long double p = partial[lvl + 1] + y * y * su.bstar[lvl];
            if (p <= su.radius_work) {
                partial[lvl] = p;
                push_exact(lvl, xv);
                push_sig(lvl, xv);
                if (lvl == cutoff) {
                    Task t;
                    t.start_level = lvl - 1;
                    t.prefix_x.assign(x.begin() + static_cast<long>(lvl), x.end());
                    t.sigma.assign(sig_row(lvl), sig_row(lvl) + lvl);
                    t.a.assign(a_at(lvl), a_at(lvl) + NA);
                    t.ip.assign(ip_row(lvl), ip_row(lvl) + lvl * NA);
                    t.first.assign(first_at(lvl), first_at(lvl) + su.wc);
                    t.last.assign(last_at(lvl), last_at(lvl) + su.wc);
                    t.partial = p;
                    tasks.push_back(std::move(t));
                } else {
                    --lvl;
                    zig[lvl].reset(center(lvl));
                    continue;
                }
            } else {
                zig[lvl].kill_current_side();
            }
            while (!zig[lvl].advance()) {
                ++lvl;
                if (lvl >= d) {
                    flush_budget();
                    return tasks;
                }
            }
        }
    }

    void load_task(const Task& t) {
        const std::size_t entry = t.start_level + 1;
        std::copy(t.prefix_x.begin(), t.prefix_x.end(),
                  x.begin() + static_cast<long>(entry));
        std::copy(t.sigma.begin(), t.sigma.end(), sig_row(entry));
        std::memcpy(a_at(entry), t.a.data(), NA * 8);
        std::memcpy(ip_row(entry), t.ip.data(), t.ip.size() * 8);
        std::memcpy(first_at(entry), t.first.data(), su.wc * 8);
        std::memcpy(last_at(entry), t.last.data(), su.wc * 8);
        partial[entry] = t.partial;
    }
};

template <int NA>
EnumStats run_quadratic(const Setup& su, const EnumOptions& opts, BallSink& sink) {
    Budget budget(opts.node_budget);
    EnumStats stats;

    unsigned workers = opts.workers ? opts.workers : std::thread::hardware_concurrency();
    if (workers == 0) workers = 1;

    if (workers == 1 || su.dim < 3) {
        Engine<NA> eng(su, sink, budget);
        eng.init_root();
        eng.run(su.dim - 1);
        eng.flush_budget();
        if (eng.aborted) throw BudgetExceeded(opts.node_budget);
        stats.nodes = eng.nodes;
        stats.points = eng.points;
        return stats;
    }

    Engine<NA> gen(su, sink, budget);
    gen.init_root();
    long double top_reach = 2.0L * sqrtl(su.radius_work / su.bstar[su.dim - 1]) + 1.0L;
    std::size_t fixed_levels =
        (su.dim >= 5 && top_reach < static_cast<long double>(16 * workers)) ? 2 : 1;
    std::vector<Task> tasks = gen.generate_tasks(fixed_levels);
    gen.flush_budget();
    if (gen.aborted || budget.tripped.load()) throw BudgetExceeded(opts.node_budget);
    stats.nodes += gen.nodes;
    stats.points += gen.points;

    std::vector<std::unique_ptr<BallSink>> task_sinks(tasks.size());
    std::vector<EnumStats> task_stats(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};

    auto worker_fn = [&]() {
        for (;;) {
            std::size_t idx = next.fetch_add(1);
            if (idx >= tasks.size()) return;
            if (budget.tripped.load(std::memory_order_relaxed)) {
                failed.store(true);
                return;
            }
            task_sinks[idx] = sink.make_task_sink();
            Engine<NA> eng(su, *task_sinks[idx], budget);
            eng.load_task(tasks[idx]);
            eng.run(tasks[idx].start_level);
            eng.flush_budget();
            if (eng.aborted) {
                failed.store(true);
                return;
            }
            task_stats[idx].nodes = eng.nodes;
            task_stats[idx].points = eng.points;
        }
    };

    std::vector<std::thread> pool;
    unsigned nthreads = static_cast<unsigned>(
        std::min<std::size_t>(workers, std::max<std::size_t>(tasks.size(), 1)));
    pool.reserve(nthreads);
    for (unsigned i = 0; i < nthreads; ++i) pool.emplace_back(worker_fn);
    for (auto& th : pool) th.join();

    if (failed.load() || budget.tripped.load()) throw BudgetExceeded(opts.node_budget);
    for (std::size_t i = 0; i < tasks.size(); ++i) {
        stats.nodes += task_stats[i].nodes;
        stats.points += task_stats[i].points;
        sink.absorb(*task_sinks[i]);
    }
    return stats;
}

// ---- big-integer fallback engine (single-threaded, exact Int residuals) ----

struct BigEngine {
    const Setup& su;
    BallSink& sink;
    Budget& budget;

    std::vector<long double> sig, partial;
    std::vector<long> x;
    std::vector<ZigzagLevel> zig;
    std::vector<std::vector<Int>> res;
    std::uint64_t nodes = 0, points = 0;
    bool aborted = false;

    BigEngine(const Setup& s, BallSink& snk, Budget& b) : su(s), sink(snk), budget(b) {
        const std::size_t d = su.dim;
        sig.assign((d + 1) * d, 0.0L);
        partial.assign(d + 1, 0.0L);
        x.assign(d, 0);
        zig.resize(d);
        res.assign(d + 1, std::vector<Int>(d, 0));
        for (std::size_t j = 0; j < d; ++j) res[d][j] = -su.target[j];
    }

    long double center(std::size_t lvl) { return su.vc[lvl] - sig[(lvl + 1) * su.dim + lvl]; }

    void run() {
        const std::size_t d = su.dim;
        std::size_t lvl = d - 1;
        zig[lvl].reset(center(lvl));
        for (;;) {
            ++nodes;
            if (!budget.charge(1)) {
                aborted = true;
                return;
            }
            long long xv = zig[lvl].value();
            x[lvl] = static_cast<long>(xv);
            long double y = static_cast<long double>(xv) - center(lvl);
            long double p = partial[lvl + 1] + y * y * su.bstar[lvl];
            bool inside = p <= su.radius_work;
            if (inside) {
                for (std::size_t j = 0; j < d; ++j)
                    res[lvl][j] = res[lvl + 1][j] + Int(static_cast<long>(xv)) * su.rows[lvl][j];
                if (lvl > 0) {
                    partial[lvl] = p;
                    for (std::size_t k = 0; k < lvl; ++k)
                        sig[lvl * d + k] =
                            sig[(lvl + 1) * d + k] + su.mu[lvl][k] * static_cast<long double>(xv);
                    --lvl;
                    zig[lvl].reset(center(lvl));
                    continue;
                }
                Int dist = 0;
                for (std::size_t j = 0; j < d; ++j) dist += res[0][j] * res[0][j];
                if (dist <= su.radius_sq) {
                    ++points;
                    std::vector<Int> coeffs(x.begin(), x.end());
                    sink.on_point_full(coeffs, res[0]);
                }
            } else {
                zig[lvl].kill_current_side();
            }
            while (!zig[lvl].advance()) {
                ++lvl;
                if (lvl >= d) return;
            }
        }
    }
};

}  // namespace

BallQuery make_ball_query(Basis basis, std::vector<Int> target, Int radius_sq) {
    BallQuery q;
    q.gso = gso(basis);
    q.basis = std::move(basis);
    q.target = std::move(target);
    q.radius_sq = std::move(radius_sq);
    if (q.target.size() != q.basis.dim())
        throw std::invalid_argument("make_ball_query: target dimension mismatch");
    if (q.radius_sq < 0) throw std::invalid_argument("make_ball_query: negative radius");
    return q;
}

EnumStats enumerate_ball_stream(const BallQuery& query, const EnumOptions& opts,
                                BallSink& sink) {
    Setup su = build_setup(query);
    sink.begin(stream_info(su));

    switch (su.na) {
        case 1: return run_quadratic<1>(su, opts, sink);
        case 2: return run_quadratic<2>(su, opts, sink);
        case 3: return run_quadratic<3>(su, opts, sink);
        case 4: return run_quadratic<4>(su, opts, sink);
        case 5: return run_quadratic<5>(su, opts, sink);
        case 6: return run_quadratic<6>(su, opts, sink);
        case 7: return run_quadratic<7>(su, opts, sink);
        case 8: return run_quadratic<8>(su, opts, sink);
        default: break;
    }
    Budget budget(opts.node_budget);
    BigEngine eng(su, sink, budget);
    eng.run();
    if (eng.aborted) throw BudgetExceeded(opts.node_budget);
    return EnumStats{eng.nodes, eng.points};
}

namespace {

struct ListSink : BallSink {
    StreamInfo info;
    std::vector<EnumPoint> pts;

    void begin(const StreamInfo& i) override { info = i; }
    bool wants_full_points() const override { return true; }

    void on_point(const long*, const std::uint64_t*, const std::uint64_t*) override {
        throw std::logic_error("ListSink expects full points");
    }

    void on_point_full(const std::vector<Int>& coeffs,
                       const std::vector<Int>& residual) override {
        EnumPoint p;
        p.coeffs = coeffs;
        p.point.resize(info.dim);
        for (std::size_t j = 0; j < info.dim; ++j) p.point[j] = residual[j] + info.target[j];
        pts.push_back(std::move(p));
    }

    std::unique_ptr<BallSink> make_task_sink() override {
        auto child = std::make_unique<ListSink>();
        child->info = info;
        return child;
    }

    void absorb(BallSink& task_sink) override {
        auto& child = static_cast<ListSink&>(task_sink);
        pts.insert(pts.end(), std::make_move_iterator(child.pts.begin()),
                   std::make_move_iterator(child.pts.end()));
    }
};

}  // namespace

std::vector<EnumPoint> enumerate_ball(const BallQuery& query, const EnumOptions& opts) {
    ListSink sink;
    enumerate_ball_stream(query, opts, sink);
    std::sort(sink.pts.begin(), sink.pts.end(),
              [](const EnumPoint& a, const EnumPoint& b) { return a.coeffs < b.coeffs; });
    return std::move(sink.pts);
}

double count_bound(double radius, double s_lower, unsigned dim) {
    if (!(s_lower > 0)) throw std::invalid_argument("count_bound: s_lower must be positive");
    if (radius < 0) throw std::invalid_argument("count_bound: negative radius");
    return std::pow(2.0 * radius / s_lower + 1.0, static_cast<double>(dim));
}

}  // namespace latkey
