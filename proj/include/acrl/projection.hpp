#pragma once

#include <atomic>
#include <cstdint>
#include <vector>

#include "acrl/constraint.hpp"

namespace acrl {

/// Outcome of a projection call.
struct ProjectionReport {
    Action projected;
    bool moved = false;
    int iterations = 0;
    double residual = 0.0;
};

struct NoConvergence : std::runtime_error {
    ProjectionReport report;
    explicit NoConvergence(ProjectionReport r)
        : std::runtime_error("projection did not converge"), report(std::move(r)) {}
};

/// Shared counter of nearest-feasible-point solves. Every call through
/// `project()` increments the global counter and, when given, a local one.
struct QpCounter {
    std::atomic<std::uint64_t> count{0};
};

QpCounter& global_qp_counter();

Action project_ball(const Action& a, double radius_sq);
Action project_box(const Action& a, const Vec& lo, const Vec& hi);

/// Closest point in the halfspace {x : w'x <= b}.
Action project_halfspace(const Action& a, const Vec& w, double b);

/// Closest point in the weighted L1 ball {x : sum |w_i||x_i| <= cap}.
Action project_weighted_abs_sum(const Action& a, const Vec& w, double cap);

/// Dykstra's alternating projection onto the intersection of closed-form
/// projectable sets. The output is feasibilized by one final per-set pass.
ProjectionReport project_dykstra(const Action& a, const EnvState& s,
                                 const std::vector<ConstraintSpec>& sets,
                                 int max_iter = 10000, double tol = 1e-9);

/// Euclidean projection onto an arbitrary supported ConstraintSpec.
/// Counts one QP operation on the global counter (and `local` if non-null).
ProjectionReport project(const ConstraintSpec& spec, const EnvState& s, const Action& a,
                         QpCounter* local = nullptr);

}  // namespace acrl
