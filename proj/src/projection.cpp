#include "acrl/projection.hpp"

#include <cmath>
#include <limits>

namespace acrl {

QpCounter& global_qp_counter() {
    static QpCounter counter;
    return counter;
}

Action project_ball(const Action& a, double radius_sq) {
    if (radius_sq <= 0.0) throw std::invalid_argument("radius_sq must be positive");
    const double n2 = a.squaredNorm();
    if (n2 <= radius_sq) return a;
    Action out = a * std::sqrt(radius_sq / n2);
    // Rounding can leave the scaled point a few ulps outside; shrink until the
    // membership test itself passes.
    for (int it = 0; it < 8 && out.squaredNorm() > radius_sq; ++it)
        out *= 1.0 - 4.0 * std::numeric_limits<double>::epsilon();
    return out;
}

Action project_box(const Action& a, const Vec& lo, const Vec& hi) {
    if (a.size() != lo.size() || a.size() != hi.size())
        throw std::invalid_argument("box dimension mismatch");
    return a.cwiseMax(lo).cwiseMin(hi);
}

Action project_halfspace(const Action& a, const Vec& w, double b) {
    const double excess = w.dot(a) - b;
    if (excess <= 0.0) return a;
    Action out = a - (excess / w.squaredNorm()) * w;
    // Tighten away rounding-level overshoot so the output satisfies w.x <= b.
    for (int it = 0; it < 8; ++it) {
        const double e = w.dot(out) - b;
        if (e <= 0.0) break;
        out -= (e / w.squaredNorm()) * (1.0 + 1e-12) * w;
    }
    return out;
}

Action project_weighted_abs_sum(const Action& a, const Vec& w, double cap) {
    const Vec wa = w.cwiseAbs();
    if (wa.dot(a.cwiseAbs()) <= cap) return a;
    // Soft-threshold with level theta chosen by bisection so the weighted
    // L1 norm of the shrunk vector hits the cap.
    auto norm_at = [&](double theta) {
        double acc = 0.0;
        for (int i = 0; i < a.size(); ++i)
            acc += wa[i] * std::max(std::abs(a[i]) - theta * wa[i], 0.0);
        return acc;
    };
    double lo_t = 0.0, hi_t = 0.0;
    for (int i = 0; i < a.size(); ++i)
        if (wa[i] > 0.0) hi_t = std::max(hi_t, std::abs(a[i]) / wa[i]);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo_t + hi_t);
        if (norm_at(mid) > cap)
            lo_t = mid;
        else
            hi_t = mid;
    }
    const double theta = 0.5 * (lo_t + hi_t);
    Action out = a;
    for (int i = 0; i < a.size(); ++i) {
        const double mag = std::max(std::abs(a[i]) - theta * wa[i], 0.0);
        out[i] = (a[i] < 0.0 ? -mag : mag);
    }
    // Bisection stops within a tolerance; rescale so the cap holds exactly.
    for (int it = 0; it < 8; ++it) {
        const double n1 = wa.dot(out.cwiseAbs());
        if (n1 <= cap) break;
        out *= (cap / n1) * (1.0 - 1e-15);
    }
    return out;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Closed-form projection onto a single spec. Dykstra requires each member
// set to be projectable this way.
Action project_single(const ConstraintSpec& spec, const EnvState& s, const Action& a) {
    using Kind = ConstraintSpec::Kind;
    switch (spec.kind) {
        case Kind::Ball:
            return project_ball(a, spec.radius_sq);
        case Kind::Box:
            return project_box(a, spec.lo, spec.hi);
        case Kind::WeightedAbsSum:
            return project_weighted_abs_sum(a, spec.effective_weights(s), spec.cap);
        case Kind::LinearSystem:
            if (spec.A.rows() != 1)
                throw std::invalid_argument("only single halfspaces are closed-form projectable");
            return project_halfspace(a, spec.A.row(0).transpose(), spec.b[0]);
        default:
            throw std::invalid_argument("set has no closed-form projection");
    }
}

std::vector<ConstraintSpec> decompose(const ConstraintSpec& spec, const EnvState& s) {
    using Kind = ConstraintSpec::Kind;
    std::vector<ConstraintSpec> sets;
    switch (spec.kind) {
        case Kind::SignedSumBand: {
            const int n = spec.dim;
            sets.push_back(ConstraintSpec::box(Vec::Zero(n), Vec::Constant(n, spec.per_cap)));
            Mat up(1, n), dn(1, n);
            up.setOnes();
            dn.setConstant(-1.0);
            sets.push_back(ConstraintSpec::linear_system(up, Vec::Constant(1, spec.total + spec.band)));
            sets.push_back(ConstraintSpec::linear_system(dn, Vec::Constant(1, -(spec.total - spec.band))));
            break;
        }
        case Kind::LinearSystem: {
            for (int j = 0; j < spec.A.rows(); ++j) {
                Mat row = spec.A.row(j);
                sets.push_back(ConstraintSpec::linear_system(row, Vec::Constant(1, spec.b[j])));
            }
            break;
        }
        default: {
            ConstraintSpec frozen = spec;
            if (spec.state_weights) {
                frozen.weights = spec.effective_weights(s);
                frozen.state_weights = nullptr;
            }
            sets.push_back(std::move(frozen));
        }
    }
    return sets;
}

// Non-convex positive-part cap: enumerate sign patterns of (w_i x_i), project
// onto each convex piece, keep the nearest feasible candidate.
ProjectionReport project_positive_part(const ConstraintSpec& spec, const EnvState& s,
                                       const Action& a) {
    const Vec w = spec.effective_weights(s);
    const int n = static_cast<int>(w.size());
    std::vector<int> active;  // coordinates with nonzero weight
    for (int i = 0; i < n; ++i)
        if (w[i] != 0.0) active.push_back(i);
    if (active.size() > 16)
        throw std::invalid_argument("positive-part projection limited to 16 weighted coordinates");

    ProjectionReport best;
    double best_d = kInf;
    const std::size_t patterns = std::size_t{1} << active.size();
    for (std::size_t bits = 0; bits < patterns; ++bits) {
        Vec lo = Vec::Constant(n, -kInf), hi = Vec::Constant(n, kInf);
        Mat row = Mat::Zero(1, n);
        for (std::size_t k = 0; k < active.size(); ++k) {
            const int i = active[k];
            const bool positive = (bits >> k) & 1;  // sign of w_i x_i in this piece
            if (positive) {
                if (w[i] > 0.0) lo[i] = 0.0; else hi[i] = 0.0;
                row(0, i) = w[i];
            } else {
                if (w[i] > 0.0) hi[i] = 0.0; else lo[i] = 0.0;
            }
        }
        std::vector<ConstraintSpec> sets;
        sets.push_back(ConstraintSpec::box(lo, hi));
        sets.push_back(ConstraintSpec::linear_system(row, Vec::Constant(1, spec.cap)));
        ProjectionReport cand;
        try {
            cand = project_dykstra(a, s, sets);
        } catch (const NoConvergence&) {
            continue;
        }
        if (constraint_residual(spec, s, cand.projected) > 1e-8) continue;
        const double d = (cand.projected - a).norm();
        if (d < best_d) {
            best_d = d;
            best = std::move(cand);
        }
    }
    if (!std::isfinite(best_d)) throw NoConvergence(best);
    best.residual = constraint_residual(spec, s, best.projected);
    return best;
}

}  // namespace

ProjectionReport project_dykstra(const Action& a, const EnvState& s,
                                 const std::vector<ConstraintSpec>& sets,
                                 int max_iter, double tol) {
    if (sets.empty()) throw std::invalid_argument("no sets to project onto");
    bool feasible = true;
    for (const auto& set : sets)
        if (!is_feasible(set, s, a)) { feasible = false; break; }
    if (feasible) return ProjectionReport{a, false, 1, 0.0};

    const int m = static_cast<int>(sets.size());
    Action x = a;
    std::vector<Vec> corrections(m, Vec::Zero(a.size()));
    int iterations = 0;
    for (int it = 0; it < max_iter; ++it) {
        const Action prev = x;
        for (int j = 0; j < m; ++j) {
            const Action y = x + corrections[j];
            const Action p = project_single(sets[j], s, y);
            corrections[j] = y - p;
            x = p;
        }
        iterations = it + 1;
        if ((x - prev).norm() < tol) break;
    }
    // Cyclic clamp passes drive the output onto every set exactly; Dykstra has
    // already landed within tol so only tiny corrections remain.
    for (int pass = 0; pass < 100; ++pass) {
        bool all_feasible = true;
        for (const auto& set : sets)
            if (!is_feasible(set, s, x)) {
                all_feasible = false;
                x = project_single(set, s, x);
            }
        if (all_feasible) break;
    }
    double residual = 0.0;
    for (const auto& set : sets) residual = std::max(residual, constraint_residual(set, s, x));
    ProjectionReport report{x, true, iterations, residual};
    if (residual > 1e-6) throw NoConvergence(std::move(report));
    return report;
}

ProjectionReport project(const ConstraintSpec& spec, const EnvState& s, const Action& a,
                         QpCounter* local) {
    global_qp_counter().count.fetch_add(1, std::memory_order_relaxed);
    if (local) local->count.fetch_add(1, std::memory_order_relaxed);

    using Kind = ConstraintSpec::Kind;
    if (is_feasible(spec, s, a)) return ProjectionReport{a, false, 1, 0.0};
    switch (spec.kind) {
        case Kind::Ball: {
            Action p = project_ball(a, spec.radius_sq);
            return ProjectionReport{std::move(p), true, 1, 0.0};
        }
        case Kind::Box: {
            Action p = project_box(a, spec.lo, spec.hi);
            return ProjectionReport{std::move(p), true, 1, 0.0};
        }
        case Kind::WeightedAbsSum: {
            Action p = project_weighted_abs_sum(a, spec.effective_weights(s), spec.cap);
            const double res = constraint_residual(spec, s, p);
            return ProjectionReport{std::move(p), true, 1, res};
        }
        case Kind::PositivePartSum:
            return project_positive_part(spec, s, a);
        case Kind::SignedSumBand:
        case Kind::LinearSystem:
            return project_dykstra(a, s, decompose(spec, s));
        case Kind::FiniteMask:
            throw std::invalid_argument("finite-mask constraints have no Euclidean projection");
    }
    throw std::logic_error("unreachable");
}

}  // namespace acrl
