#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "acrl/arm.hpp"
#include "acrl/environment.hpp"
#include "acrl/nets.hpp"

namespace acrl {

/// One row of the training metrics table (CSV columns in this order).
struct MetricsRow {
    long step = 0;
    double wall_ms = 0.0;
    double eval_return = 0.0;  // unscaled
    double valid_action_rate = 0.0;
    std::uint64_t qp_count_cum = 0;
    double eta = 0.0;
    double critic_loss = 0.0;
    double policy_loss = 0.0;
    double per_action_inference_us = 0.0;
};

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows);
std::vector<MetricsRow> read_csv(std::istream& in);

struct EvalResult {
    double mean_return = 0.0;        // unscaled
    double valid_action_rate = 0.0;  // mean over steps of 100-sample feasible fraction
    double per_action_inference_us = 0.0;
    std::uint64_t qp_used = 0;
};

/// Roll out `episodes` with ARM(max_attempts=10, Project). The valid-action
/// rate draws 100 fresh policy samples per visited state; inference time is
/// wall time per emitted action including any projection fallback.
EvalResult evaluate_policy(const GaussianPolicy& policy, const std::string& env_id,
                           const Preference& lam, int episodes, Rng& rng,
                           QpCounter* qp = nullptr);

}  // namespace acrl
