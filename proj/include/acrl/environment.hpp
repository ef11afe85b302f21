#pragma once

#include <memory>
#include <random>
#include <string>
#include <tuple>

#include "acrl/constraint.hpp"
#include "acrl/types.hpp"

namespace acrl {

using Rng = std::mt19937_64;

/// A continuous-action environment. Dynamics consume the instance's own RNG
/// stream, so identical seeds and action sequences give identical trajectories.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::string id() const = 0;
    virtual int state_dim() const = 0;
    virtual int action_dim() const = 0;
    virtual Vec action_low() const = 0;
    virtual Vec action_high() const = 0;
    /// Declared raw reward range (r_min, r_max), used by the [0,1] rescaler.
    virtual std::pair<double, double> reward_bounds() const = 0;
    virtual int horizon() const = 0;

    virtual EnvState reset(std::uint64_t seed) = 0;
    /// Advance the dynamics with a feasible action. Infeasible actions must be
    /// intercepted upstream; environments reject them with an error.
    virtual std::tuple<EnvState, double, bool> step(const EnvState& s, const Action& a) = 0;
};

/// Factory keyed by environment id: BSS3z, BSS5z, NSFnetLite, BallReach.
std::unique_ptr<Environment> make_environment(const std::string& env_id);

/// The Table-5 feasible-set description of an environment.
ConstraintSpec constraint_spec_of(const std::string& env_id);

/// One transition of the augmented two-objective MDP. A feasible action
/// delegates to the base dynamics and yields [r, 0]; an infeasible action
/// self-loops (base environment untouched) and yields [0, -K]. The task
/// component is the raw env reward; rescaling to [0,1] is AutoMdp's job.
std::tuple<EnvState, AugmentedReward, bool> augment_step(Environment& env,
                                                         const ConstraintSpec& spec,
                                                         const PenaltyConfig& cfg,
                                                         const EnvState& s, const Action& a);

/// AUTO-MDP wrapper: rescales the task reward into [0,1], counts self-loops
/// against the episode step budget, and tracks the unscaled return.
class AutoMdp {
public:
    AutoMdp(std::unique_ptr<Environment> env, ConstraintSpec spec, PenaltyConfig cfg);

    EnvState reset(std::uint64_t seed);
    /// Returns (next state, rescaled augmented reward, env done, timeout).
    std::tuple<EnvState, AugmentedReward, bool, bool> step(const EnvState& s, const Action& a);

    Environment& env() { return *env_; }
    const ConstraintSpec& spec() const { return spec_; }
    const PenaltyConfig& cfg() const { return cfg_; }
    double last_raw_reward() const { return last_raw_reward_; }
    /// Number of infeasible actions that ever reached the base dynamics.
    /// Must stay zero; audited by the trainer.
    std::uint64_t violation_count() const { return violations_; }

    double rescale(double raw) const;

private:
    std::unique_ptr<Environment> env_;
    ConstraintSpec spec_;
    PenaltyConfig cfg_;
    int steps_in_episode_ = 0;
    double last_raw_reward_ = 0.0;
    std::uint64_t violations_ = 0;
};

}  // namespace acrl
