#include "doctest.h"
#include "latkey/enumeration.hpp"
#include "latkey/rng.hpp"
#include "oracles.hpp"

#include <set>

using namespace latkey;

namespace {

Basis make(std::vector<std::vector<long>> rows) {
    Matrix m;
    for (auto& r : rows) m.emplace_back(r.begin(), r.end());
    return Basis(std::move(m));
}

std::vector<Int> vec(std::vector<long> v) { return std::vector<Int>(v.begin(), v.end()); }

std::set<std::vector<Int>> point_set(const std::vector<EnumPoint>& pts) {
    std::set<std::vector<Int>> s;
    for (const auto& p : pts) s.insert(p.point);
    return s;
}

struct CountSink : BallSink {
    std::uint64_t n = 0;
    void on_point(const long*, const std::uint64_t*, const std::uint64_t*) override { ++n; }
    void on_point_full(const std::vector<Int>&, const std::vector<Int>&) override { ++n; }
    std::unique_ptr<BallSink> make_task_sink() override { return std::make_unique<CountSink>(); }
    void absorb(BallSink& c) override { n += static_cast<CountSink&>(c).n; }
};

}  // namespace

TEST_CASE("integer line ball") {
    auto q = make_ball_query(make({{1}}), vec({0}), 4);
    auto pts = enumerate_ball(q);
    REQUIRE(pts.size() == 5);
    std::set<Int> xs;
    for (const auto& p : pts) xs.insert(p.point[0]);
    CHECK(xs == std::set<Int>{-2, -1, 0, 1, 2});
}

TEST_CASE("unit ball in Z^2 has five points") {
    auto q = make_ball_query(make({{1, 0}, {0, 1}}), vec({0, 0}), 1);
    auto pts = enumerate_ball(q);
    CHECK(pts.size() == 5);
    auto got = point_set(pts);
    CHECK(got.count(vec({0, 0})) == 1);
    CHECK(got.count(vec({1, 0})) == 1);
    CHECK(got.count(vec({-1, 0})) == 1);
    CHECK(got.count(vec({0, 1})) == 1);
    CHECK(got.count(vec({0, -1})) == 1);
}

TEST_CASE("radius zero keeps only the target when it is a lattice point") {
    auto q = make_ball_query(make({{2, 0}, {0, 2}}), vec({4, 6}), 0);
    auto pts = enumerate_ball(q);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].point == vec({4, 6}));

    auto q2 = make_ball_query(make({{2, 0}, {0, 2}}), vec({3, 6}), 0);
    CHECK(enumerate_ball(q2).empty());
}

TEST_CASE("enumeration equals brute force on random small lattices") {
    Rng rng(31);
    int done = 0;
    while (done < 120) {
        std::size_t dim = 1 + static_cast<std::size_t>(rng.below(4).get_ui());
        Matrix m(dim, std::vector<Int>(dim));
        for (auto& row : m)
            for (auto& x : row) x = Int(rng.below(21)) - 10;
        Basis basis{m};
        if (det_abs(basis) == 0) continue;

        std::vector<Int> target(dim);
        for (auto& t : target) t = Int(rng.below(41)) - 20;
        Int radius_sq = rng.below(120) + 1;

        std::vector<oracle::BallPoint> expect;
        try {
            expect = oracle::ball_points(m, target, radius_sq);
        } catch (const std::runtime_error&) {
            continue;  // box too large; try another instance
        }
        auto got = enumerate_ball(make_ball_query(basis, target, radius_sq));
        REQUIRE(got.size() == expect.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].coeffs == expect[i].coeffs);
            CHECK(got[i].point == expect[i].point);
        }
        // soundness + lattice membership on every output
        for (const auto& p : got) {
            Int dist = 0;
            for (std::size_t c = 0; c < dim; ++c) {
                Int diff = p.point[c] - target[c];
                dist += diff * diff;
            }
            CHECK(dist <= radius_sq);
            for (std::size_t c = 0; c < dim; ++c) {
                Int acc = 0;
                for (std::size_t i = 0; i < dim; ++i) acc += p.coeffs[i] * m[i][c];
                CHECK(acc == p.point[c]);
            }
        }
        ++done;
    }
}

TEST_CASE("identical queries give identical ordered output") {
    Matrix m = {{3, 1, 0}, {1, -4, 2}, {0, 2, 5}};
    auto q = make_ball_query(Basis{m}, vec({1, 2, 3}), 40);
    auto a = enumerate_ball(q);
    auto b = enumerate_ball(q);
    REQUIRE(a.size() == b.size());
    REQUIRE(!a.empty());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].coeffs == b[i].coeffs);
        CHECK(a[i].point == b[i].point);
    }
}

TEST_CASE("worker count does not change results or counters") {
    Matrix m = {{7, 1, 0, 3}, {1, -9, 2, 0}, {0, 2, 11, 1}, {3, 0, 1, 13}};
    auto q = make_ball_query(Basis{m}, vec({5, -3, 2, 8}), 400);
    EnumOptions one;
    one.workers = 1;
    EnumOptions four;
    four.workers = 4;
    auto a = enumerate_ball(q, one);
    auto b = enumerate_ball(q, four);
    REQUIRE(a.size() == b.size());
    REQUIRE(!a.empty());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].point == b[i].point);

    CountSink s1, s4;
    auto st1 = enumerate_ball_stream(q, one, s1);
    auto st4 = enumerate_ball_stream(q, four, s4);
    CHECK(st1.nodes == st4.nodes);
    CHECK(st1.points == st4.points);
    CHECK(s1.n == s4.n);
    CHECK(s1.n == st1.points);
}

TEST_CASE("huge-entry scaled lattice matches the unscaled reference") {
    // 2^40 * (Z^4 ball): exercises multi-limb lanes and column scaling
    Int s = pow2(40);
    Matrix big(4, std::vector<Int>(4, 0));
    for (int i = 0; i < 4; ++i) big[i][i] = s;
    std::vector<Int> target = {s * 1, s * 2, s * 3, s * 4};
    Int radius_sq = s * s * 9;

    Matrix small(4, std::vector<Int>(4, 0));
    for (int i = 0; i < 4; ++i) small[i][i] = 1;
    auto expect = oracle::ball_points(small, vec({1, 2, 3, 4}), 9);
    REQUIRE(!expect.empty());

    auto got = enumerate_ball(make_ball_query(Basis{big}, target, radius_sq));
    REQUIRE(got.size() == expect.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].coeffs == expect[i].coeffs);
        for (int c = 0; c < 4; ++c) CHECK(got[i].point[c] == expect[i].point[c] * s);
    }
}

TEST_CASE("node budget aborts with BudgetExceeded") {
    Matrix m(3, std::vector<Int>(3, 0));
    for (int i = 0; i < 3; ++i) m[i][i] = 1;
    auto q = make_ball_query(Basis{m}, vec({0, 0, 0}), 100);
    EnumOptions opts;
    opts.workers = 1;
    opts.node_budget = 5;
    CHECK_THROWS_AS(enumerate_ball(q, opts), BudgetExceeded);
    opts.node_budget = 0;  // unlimited
    CHECK_NOTHROW(enumerate_ball(q, opts));
}

TEST_CASE("query validation") {
    CHECK_THROWS_AS(make_ball_query(make({{1, 0}, {0, 1}}), vec({0}), 4),
                    std::invalid_argument);
    CHECK_THROWS_AS(make_ball_query(make({{1}}), vec({0}), -1), std::invalid_argument);
    BallQuery q = make_ball_query(make({{1, 0}, {0, 1}}), vec({0, 0}), 4);
    q.gso.norms_sq.pop_back();  // now inconsistent with the basis
    CHECK_THROWS_AS(enumerate_ball(q), std::invalid_argument);
}

TEST_CASE("count_bound formula and comparison to live counts") {
    CHECK(count_bound(1.0, 2.0, 2) == doctest::Approx(4.0));
    CHECK(count_bound(0.0, 5.0, 7) == doctest::Approx(1.0));
    CHECK_THROWS_AS(count_bound(1.0, 0.0, 2), std::invalid_argument);

    // Z^2 unit ball: bound with s(L)=1, R=1 gives 9 >= 5 actual points
    auto q = make_ball_query(make({{1, 0}, {0, 1}}), vec({0, 0}), 1);
    auto pts = enumerate_ball(q);
    CHECK(pts.size() == 5);
    CHECK(count_bound(1.0, 1.0, 2) == doctest::Approx(9.0));
    CHECK(static_cast<double>(pts.size()) < count_bound(1.0, 1.0, 2));
}

TEST_CASE("cardinality bound holds against certified lower bounds on random cases") {
    Rng rng(41);
    int done = 0;
    while (done < 40) {
        std::size_t dim = 2 + static_cast<std::size_t>(rng.below(3).get_ui());
        Matrix m(dim, std::vector<Int>(dim));
        for (auto& row : m)
            for (auto& x : row) x = Int(rng.below(21)) - 10;
        Basis basis{m};
        if (det_abs(basis) == 0) continue;
        auto red = lll_reduce(basis);
        Int radius_sq = rng.below(200) + 1;
        std::vector<Int> target(dim, 0);
        for (auto& t : target) t = Int(rng.below(31)) - 15;

        auto pts = enumerate_ball(make_ball_query(red.basis, target, radius_sq));
        double bound = count_bound(std::sqrt(static_cast<double>(to_ld(radius_sq))),
                                   sv_lower_bound(red.gso), static_cast<unsigned>(dim));
        CHECK(static_cast<double>(pts.size()) < bound);
        ++done;
    }
}
