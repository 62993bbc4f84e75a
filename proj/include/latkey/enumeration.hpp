#pragma once

#include "latkey/lattice.hpp"

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <vector>

namespace latkey {

// Closed-ball query: all lattice points u with ||u - target||^2 <= radius_sq.
struct BallQuery {
    Basis basis;
    GSOData gso;
    std::vector<Int> target;
    Int radius_sq;
};

BallQuery make_ball_query(Basis basis, std::vector<Int> target, Int radius_sq);

struct EnumOptions {
    // Traversal nodes (pruning-test evaluations) before the query aborts.
    // 0 disables the budget.
    std::uint64_t node_budget = 1000000000ULL;
    // Subtree workers; 0 picks hardware concurrency. Results (point set and
    // node/point counts) do not depend on the worker count.
    unsigned workers = 0;
};

struct EnumStats {
    std::uint64_t nodes = 0;
    std::uint64_t points = 0;
};

class BudgetExceeded : public std::runtime_error {
public:
    explicit BudgetExceeded(std::uint64_t limit)
        : std::runtime_error("enumeration node budget exceeded"), node_budget(limit) {}
    std::uint64_t node_budget;
};

// Emission layout for streamed points. On the fast path each point arrives
// as its coefficient vector plus the exact residuals of the *first* and
// *last* coordinates, as `lane_limbs` two's-complement 64-bit limbs each
// (true value = residual * scale + target coordinate). Consumers that need
// all coordinates (wants_full_points) receive exact residual vectors
// instead; that path costs a few big-integer products per point.
struct StreamInfo {
    std::size_t dim = 0;
    unsigned lane_limbs = 0;
    Int first_scale = 1;
    Int last_scale = 1;
    std::vector<Int> target;
};

// Consumer of enumerated points. Every emitted point has already passed the
// exact integer distance check. make_task_sink/absorb support subtree
// parallelism: each worker task writes to its own sink and the results are
// absorbed in deterministic task order.
class BallSink {
public:
    virtual ~BallSink() = default;
    virtual void begin(const StreamInfo& info) { (void)info; }
    virtual bool wants_full_points() const { return false; }
    // fast path (wants_full_points() == false)
    virtual void on_point(const long* coeffs, const std::uint64_t* first_residual_lanes,
                          const std::uint64_t* last_residual_lanes) = 0;
    // full path: exact residuals (point - target) for every coordinate
    virtual void on_point_full(const std::vector<Int>& coeffs,
                               const std::vector<Int>& residual) = 0;
    virtual std::unique_ptr<BallSink> make_task_sink() = 0;
    virtual void absorb(BallSink& task_sink) = 0;
};

// Streams every lattice point in the closed ball through `sink`. Exhaustive
// Fincke-Pohst search over the Gram-Schmidt levels: float bounds are inflated
// by 2^-20 so rounding can never prune a true point, and every emission is
// re-verified with an exact integer distance comparison.
EnumStats enumerate_ball_stream(const BallQuery& query, const EnumOptions& opts,
                                BallSink& sink);

struct EnumPoint {
    std::vector<Int> point;
    std::vector<Int> coeffs;
};

// Materialized variant; output sorted lexicographically by coefficient
// vector. Intended for moderate point counts (tests, diagnostics).
std::vector<EnumPoint> enumerate_ball(const BallQuery& query, const EnumOptions& opts = {});

// Cardinality forecast (2R/s + 1)^dim for the ball, valid whenever s_lower is
// a lower bound on the shortest vector length.
double count_bound(double radius, double s_lower, unsigned dim);

}  // namespace latkey
