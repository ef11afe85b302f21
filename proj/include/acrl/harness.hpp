#pragma once

#include <string>

#include "acrl/mosac.hpp"

namespace acrl {

struct RunConfig {
    std::string env_id = "BallReach";
    Trainer::Algo algo = Trainer::Algo::Aram;
    std::uint64_t seed = 0;
    long total_steps = 30'000;
    std::string metrics_path = "metrics.csv";
    std::string checkpoint_path = "checkpoint.bin";
    std::string mode = "train";  // train | eval
    TrainerConfig trainer = TrainerConfig::desk();

    void validate() const;
};

/// Flat key=value config file; '#' starts a comment. Unknown keys error.
RunConfig parse_config_file(const std::string& path);
/// Apply one key=value override (CLI flags win over the file).
void apply_override(RunConfig& cfg, const std::string& key, const std::string& value);

/// Execute a training or evaluation run. Writes metrics.csv and a checkpoint.
/// Returns 0 on success, 1 on training abort, 2 on bad configuration.
int run(const RunConfig& cfg);

struct BaselineStep {
    Action a_raw;
    Action a_env;
    bool qp_used = false;
};

/// One step of the projection baseline: sample unconstrained, project when
/// infeasible (one QP operation).
BaselineStep projection_baseline_step(const GaussianPolicy& policy, const EnvState& s,
                                      const Preference& lam, const ConstraintSpec& spec, Rng& rng,
                                      QpCounter* qp = nullptr);

/// Proposition-1 brute force over random tabular instances; one JSON object
/// per line. Returns the number of instances with counterexamples.
int verify_prop1(std::ostream& out, int instances, std::uint64_t seed);

struct ArmBench {
    double acceptance_rate = 0.0;
    double ks_pvalue = 1.0;  // accepted-vs-filtered-oracle radius marginal
    long draws = 0;
};

/// Acceptance-rate and distribution statistics for ARM on an environment's
/// constraint with a fresh policy.
ArmBench bench_arm(const std::string& env_id, std::uint64_t seed, int steps = 2000);

}  // namespace acrl
