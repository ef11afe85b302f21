#include "acrl/arm.hpp"

#include <cmath>

namespace acrl {

double acceptance_probability(double policy_density_at, double target_density_at, double big_m) {
    if (big_m <= 0.0) throw std::invalid_argument("M must be positive");
    if (policy_density_at <= 0.0) throw std::invalid_argument("proposal density must be positive");
    const double ratio = target_density_at / (big_m * policy_density_at);
    if (ratio > 1.0 + 1e-9)
        throw std::invalid_argument("proposal does not dominate target (M too small)");
    return std::min(ratio, 1.0);
}

ArmResult arm_sample(const GaussianPolicy& policy, const EnvState& s, const Preference& lam,
                     const ConstraintSpec& spec, const ArmConfig& cfg, Rng& rng, QpCounter* qp) {
    cfg.validate();
    ArmResult result;
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::student_t_distribution<double> student(cfg.student_nu);
    Action last;
    for (int attempt = 1; attempt <= cfg.max_attempts; ++attempt) {
        Vec eps(policy.da);
        for (int i = 0; i < policy.da; ++i)
            eps[i] = (cfg.proposal == ArmConfig::Proposal::StudentT) ? student(rng) : gauss(rng);
        const auto sample = policy.sample_with_eps(s, lam, eps);
        last = sample.a;
        if (is_feasible(spec, s, last)) {
            // Target proportional to the policy on C(s): feasible proposals
            // are accepted with probability one.
            result.action = last;
            result.attempts = attempt;
            return result;
        }
        result.rejected.push_back(last);
    }
    if (cfg.fallback == ArmConfig::Fallback::Fail) throw SamplingExhausted(std::move(result.rejected));
    result.action = project(spec, s, last, qp).projected;
    result.attempts = cfg.max_attempts;
    result.fallback_used = true;
    return result;
}

}  // namespace acrl
