#include "acrl/constraint.hpp"

#include <cmath>

namespace acrl {

ConstraintSpec ConstraintSpec::ball(double radius_sq, int dim) {
    if (radius_sq <= 0.0) throw std::invalid_argument("ball radius_sq must be positive");
    ConstraintSpec s;
    s.kind = Kind::Ball;
    s.radius_sq = radius_sq;
    s.dim = dim;
    return s;
}

ConstraintSpec ConstraintSpec::box(Vec lo, Vec hi) {
    if (lo.size() != hi.size()) throw std::invalid_argument("box bounds size mismatch");
    for (int i = 0; i < lo.size(); ++i)
        if (lo[i] > hi[i]) throw std::invalid_argument("box lo > hi");
    ConstraintSpec s;
    s.kind = Kind::Box;
    s.dim = static_cast<int>(lo.size());
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    return s;
}

ConstraintSpec ConstraintSpec::weighted_abs_sum(Vec weights, double cap) {
    ConstraintSpec s;
    s.kind = Kind::WeightedAbsSum;
    s.dim = static_cast<int>(weights.size());
    s.weights = std::move(weights);
    s.cap = cap;
    return s;
}

ConstraintSpec ConstraintSpec::positive_part_sum(Vec weights, double cap) {
    ConstraintSpec s;
    s.kind = Kind::PositivePartSum;
    s.dim = static_cast<int>(weights.size());
    s.weights = std::move(weights);
    s.cap = cap;
    return s;
}

ConstraintSpec ConstraintSpec::signed_sum_band(double total, double band, double per_cap, int dim) {
    if (band < 0.0 || per_cap <= 0.0 || dim <= 0)
        throw std::invalid_argument("bad signed_sum_band parameters");
    ConstraintSpec s;
    s.kind = Kind::SignedSumBand;
    s.dim = dim;
    s.total = total;
    s.band = band;
    s.per_cap = per_cap;
    return s;
}

ConstraintSpec ConstraintSpec::linear_system(Mat A, Vec b) {
    if (A.rows() != b.size()) throw std::invalid_argument("linear system row mismatch");
    ConstraintSpec s;
    s.kind = Kind::LinearSystem;
    s.dim = static_cast<int>(A.cols());
    s.A = std::move(A);
    s.b = std::move(b);
    return s;
}

ConstraintSpec ConstraintSpec::finite_mask(std::vector<std::vector<bool>> mask) {
    if (mask.empty()) throw std::invalid_argument("empty mask");
    ConstraintSpec s;
    s.kind = Kind::FiniteMask;
    s.dim = 1;
    s.mask = std::move(mask);
    return s;
}

namespace {

void check_dim(const ConstraintSpec& spec, const Action& a) {
    if (spec.kind == ConstraintSpec::Kind::FiniteMask) {
        if (a.size() != 1) throw std::invalid_argument("finite-mask action must be a single index");
        return;
    }
    if (a.size() != spec.dim)
        throw std::invalid_argument("action dimension does not match constraint");
}

}  // namespace

double constraint_residual(const ConstraintSpec& spec, const EnvState& s, const Action& a) {
    check_dim(spec, a);
    using Kind = ConstraintSpec::Kind;
    switch (spec.kind) {
        case Kind::Ball:
            return std::max(0.0, a.squaredNorm() - spec.radius_sq);
        case Kind::Box: {
            double v = 0.0;
            for (int i = 0; i < a.size(); ++i) {
                v = std::max(v, spec.lo[i] - a[i]);
                v = std::max(v, a[i] - spec.hi[i]);
            }
            return v;
        }
        case Kind::WeightedAbsSum: {
            const Vec w = spec.effective_weights(s);
            return std::max(0.0, w.cwiseAbs().dot(a.cwiseAbs()) - spec.cap);
        }
        case Kind::PositivePartSum: {
            const Vec w = spec.effective_weights(s);
            double acc = 0.0;
            for (int i = 0; i < a.size(); ++i) acc += std::max(w[i] * a[i], 0.0);
            return std::max(0.0, acc - spec.cap);
        }
        case Kind::SignedSumBand: {
            double v = std::max(0.0, std::abs(a.sum() - spec.total) - spec.band);
            for (int i = 0; i < a.size(); ++i) {
                v = std::max(v, -a[i]);
                v = std::max(v, a[i] - spec.per_cap);
            }
            return v;
        }
        case Kind::LinearSystem: {
            const Vec slack = spec.A * a - spec.b;
            return std::max(0.0, slack.maxCoeff());
        }
        case Kind::FiniteMask: {
            const auto si = static_cast<std::size_t>(s.x[0]);
            const auto ai = static_cast<std::size_t>(a[0]);
            if (si >= spec.mask.size() || ai >= spec.mask[si].size())
                throw std::invalid_argument("mask index out of range");
            return spec.mask[si][ai] ? 0.0 : 1.0;
        }
    }
    throw std::logic_error("unreachable");
}

bool is_feasible(const ConstraintSpec& spec, const EnvState& s, const Action& a) {
    return constraint_residual(spec, s, a) <= 0.0;
}

}  // namespace acrl
