#pragma once

#include "acrl/environment.hpp"

namespace acrl {

/// Bike-sharing rebalancing across n stations with m bikes total and a
/// per-station capacity of 40. The action is the target allocation; Poisson
/// demand is served from it, shortages and capacity overflows are the cost.
class BssEnv final : public Environment {
public:
    BssEnv(int stations, int total_bikes, bool deterministic_demand = false);

    std::string id() const override { return id_; }
    int state_dim() const override { return 2 * n_; }
    int action_dim() const override { return n_; }
    Vec action_low() const override { return Vec::Zero(n_); }
    Vec action_high() const override { return Vec::Constant(n_, kCapacity); }
    std::pair<double, double> reward_bounds() const override { return {-30.0 * n_, 0.0}; }
    int horizon() const override { return 100; }

    EnvState reset(std::uint64_t seed) override;
    std::tuple<EnvState, double, bool> step(const EnvState& s, const Action& a) override;

    static constexpr double kCapacity = 40.0;

private:
    int n_;
    int m_;
    bool deterministic_;
    std::string id_;
    Rng rng_;
};

/// Rate allocation of 9 packet flows over 8 shared links with 50-unit
/// bandwidth each. Reward is served throughput minus an over-allocation tax.
class NsfnetEnv final : public Environment {
public:
    NsfnetEnv();

    std::string id() const override { return "NSFnetLite"; }
    int state_dim() const override { return kLinks + kFlows; }
    int action_dim() const override { return kFlows; }
    Vec action_low() const override { return Vec::Zero(kFlows); }
    Vec action_high() const override { return Vec::Constant(kFlows, 50.0); }
    std::pair<double, double> reward_bounds() const override { return {-45.0, 225.0}; }
    int horizon() const override { return 100; }

    EnvState reset(std::uint64_t seed) override;
    std::tuple<EnvState, double, bool> step(const EnvState& s, const Action& a) override;

    static constexpr int kLinks = 8;
    static constexpr int kFlows = 9;
    static constexpr double kBandwidth = 50.0;
    static constexpr double kOverAllocTax = 0.1;

    /// Fixed 8x9 0/1 routing incidence; every link carries 2-4 flows.
    static const Mat& routing();

private:
    Rng rng_;
};

/// Point mass on [-1,1]^2 steered toward a goal under the Ball(0.05)
/// per-step displacement constraint.
class BallReachEnv final : public Environment {
public:
    std::string id() const override { return "BallReach"; }
    int state_dim() const override { return 4; }
    int action_dim() const override { return 2; }
    Vec action_low() const override { return Vec::Constant(2, -0.3); }
    Vec action_high() const override { return Vec::Constant(2, 0.3); }
    std::pair<double, double> reward_bounds() const override { return {-2.8285, 0.0}; }
    int horizon() const override { return 50; }

    EnvState reset(std::uint64_t seed) override;
    std::tuple<EnvState, double, bool> step(const EnvState& s, const Action& a) override;

    static constexpr double kGoalTolerance = 0.02;

private:
    Rng rng_;
};

}  // namespace acrl
