#pragma once

#include <vector>

#include "acrl/constraint.hpp"
#include "acrl/nets.hpp"
#include "acrl/projection.hpp"

namespace acrl {

struct ArmConfig {
    enum class Fallback { Project, Fail };
    enum class Proposal { Gaussian, StudentT };

    int max_attempts = 100;
    Fallback fallback = Fallback::Project;
    Proposal proposal = Proposal::Gaussian;
    double student_nu = 5.0;

    void validate() const {
        if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
        if (proposal == Proposal::StudentT && student_nu <= 2.0)
            throw std::invalid_argument("Student-t proposal needs nu > 2");
    }
};

struct ArmResult {
    Action action;
    int attempts = 0;
    std::vector<Action> rejected;
    bool fallback_used = false;
};

struct SamplingExhausted : std::runtime_error {
    std::vector<Action> rejected;
    explicit SamplingExhausted(std::vector<Action> r)
        : std::runtime_error("acceptance-rejection exhausted its attempt budget"),
          rejected(std::move(r)) {}
};

/// Acceptance probability target(a) / (M * proposal(a)). Errors when the
/// proposal fails to dominate the target (ratio above 1 + 1e-9).
double acceptance_probability(double policy_density_at, double target_density_at, double big_m);

/// Draw a feasible action by acceptance-rejection from the unconstrained
/// policy. With the default target proportional to the policy on C(s), every
/// feasible proposal is accepted outright. After max_attempts rejections the
/// fallback either projects the last proposal (one QP operation) or throws.
ArmResult arm_sample(const GaussianPolicy& policy, const EnvState& s, const Preference& lam,
                     const ConstraintSpec& spec, const ArmConfig& cfg, Rng& rng,
                     QpCounter* qp = nullptr);

}  // namespace acrl
