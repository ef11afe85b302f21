#pragma once

#include <functional>
#include <string>
#include <vector>

#include "acrl/types.hpp"

namespace acrl {

/// Declarative description of a feasible action set C(s).
///
/// Supported forms:
///   Ball             ||a||^2 <= radius_sq
///   Box              lo <= a <= hi componentwise
///   WeightedAbsSum   sum_i w_i |a_i| <= cap
///   PositivePartSum  sum_i max(w_i a_i, 0) <= cap        (non-convex)
///   SignedSumBand    |sum_i a_i - total| <= band, 0 <= a_i <= per_cap
///   LinearSystem     A a <= b
///   FiniteMask       discrete membership table, state index -> allowed actions
///
/// Weights may be state-dependent via `state_weights`; when set, it overrides
/// the static `weights` at evaluation time.
struct ConstraintSpec {
    enum class Kind {
        Ball,
        Box,
        WeightedAbsSum,
        PositivePartSum,
        SignedSumBand,
        LinearSystem,
        FiniteMask,
    };

    Kind kind = Kind::Box;
    int dim = 0;

    double radius_sq = 0.0;
    Vec lo, hi;
    Vec weights;
    double cap = 0.0;
    double total = 0.0, band = 0.0, per_cap = 0.0;
    Mat A;
    Vec b;
    std::vector<std::vector<bool>> mask;

    std::function<Vec(const EnvState&)> state_weights;

    static ConstraintSpec ball(double radius_sq, int dim);
    static ConstraintSpec box(Vec lo, Vec hi);
    static ConstraintSpec weighted_abs_sum(Vec weights, double cap);
    static ConstraintSpec positive_part_sum(Vec weights, double cap);
    static ConstraintSpec signed_sum_band(double total, double band, double per_cap, int dim);
    static ConstraintSpec linear_system(Mat A, Vec b);
    static ConstraintSpec finite_mask(std::vector<std::vector<bool>> mask);

    Vec effective_weights(const EnvState& s) const {
        return state_weights ? state_weights(s) : weights;
    }
};

/// Pure membership test for a in C(s). Boundaries count as feasible.
bool is_feasible(const ConstraintSpec& spec, const EnvState& s, const Action& a);

/// Largest constraint violation of `a` (0 when feasible).
double constraint_residual(const ConstraintSpec& spec, const EnvState& s, const Action& a);

}  // namespace acrl
