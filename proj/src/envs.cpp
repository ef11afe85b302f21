#include "acrl/envs.hpp"

#include <cmath>

#include "acrl/tabular.hpp"

namespace acrl {

// ---------------------------------------------------------------------------
// BSS

BssEnv::BssEnv(int stations, int total_bikes, bool deterministic_demand)
    : n_(stations), m_(total_bikes), deterministic_(deterministic_demand) {
    if (stations <= 0 || total_bikes <= 0) throw std::invalid_argument("bad BSS size");
    id_ = "BSS" + std::to_string(stations) + "z";
}

EnvState BssEnv::reset(std::uint64_t seed) {
    rng_.seed(seed);
    EnvState s;
    s.x = Vec::Zero(2 * n_);
    const double even = static_cast<double>(m_) / n_;
    std::uniform_real_distribution<double> u(10.0, 30.0);
    for (int i = 0; i < n_; ++i) {
        s.x[i] = std::min(even, kCapacity);
        s.x[n_ + i] = u(rng_);
    }
    return s;
}

std::tuple<EnvState, double, bool> BssEnv::step(const EnvState& s, const Action& a) {
    if (a.size() != n_) throw std::invalid_argument("BSS action dimension mismatch");
    if (std::abs(a.sum() - m_) > 5.0 + 1e-9 || a.minCoeff() < -1e-9 ||
        a.maxCoeff() > kCapacity + 1e-9)
        throw std::invalid_argument("infeasible BSS allocation reached the dynamics");

    Vec demand(n_), served(n_);
    for (int i = 0; i < n_; ++i) {
        const double forecast = s.x[n_ + i];
        demand[i] = deterministic_ ? std::round(forecast)
                                   : static_cast<double>(std::poisson_distribution<long>(forecast)(rng_));
        served[i] = std::min(demand[i], std::floor(a[i]));
    }
    const double unmet = (demand - served).sum();

    // Served bikes come back; each returns to a uniformly random station.
    Vec returned = Vec::Zero(n_);
    const long total_served = static_cast<long>(served.sum());
    if (deterministic_) {
        returned.setConstant(static_cast<double>(total_served) / n_);
    } else {
        std::uniform_int_distribution<int> station(0, n_ - 1);
        for (long k = 0; k < total_served; ++k) returned[station(rng_)] += 1.0;
    }

    double overflow = 0.0;
    EnvState next;
    next.x = s.x;
    next.step_index = s.step_index + 1;
    for (int i = 0; i < n_; ++i) {
        const double fill = a[i] - served[i] + returned[i];
        overflow += std::max(0.0, fill - kCapacity);
        next.x[i] = std::clamp(fill, 0.0, kCapacity);
        // demand forecast drifts within [5, 35]
        const double drift = deterministic_ ? 0.0
                                            : std::uniform_real_distribution<double>(-2.0, 2.0)(rng_);
        next.x[n_ + i] = std::clamp(s.x[n_ + i] + drift, 5.0, 35.0);
    }
    const double reward = -(unmet + overflow);
    const bool done = next.step_index >= horizon();
    next.done = done;
    return {next, reward, done};
}

// ---------------------------------------------------------------------------
// NSFnet

const Mat& NsfnetEnv::routing() {
    static const Mat kRouting = [] {
        Mat r = Mat::Zero(kLinks, kFlows);
        const int links[kLinks][4] = {
            {0, 1, 2, -1},   // link 1: flows 1,2,3
            {0, 3, -1, -1},  // link 2: flows 1,4
            {1, 4, 5, -1},   // link 3: flows 2,5,6
            {2, 5, 6, -1},   // link 4: flows 3,6,7
            {3, 7, 8, -1},   // link 5: flows 4,8,9
            {4, 6, 8, -1},   // link 6: flows 5,7,9
            {0, 5, 7, -1},   // link 7: flows 1,6,8
            {1, 3, 6, 8},    // link 8: flows 2,4,7,9
        };
        for (int j = 0; j < kLinks; ++j)
            for (int k = 0; k < 4; ++k)
                if (links[j][k] >= 0) r(j, links[j][k]) = 1.0;
        return r;
    }();
    return kRouting;
}

NsfnetEnv::NsfnetEnv() = default;

EnvState NsfnetEnv::reset(std::uint64_t seed) {
    rng_.seed(seed);
    EnvState s;
    s.x = Vec::Zero(kLinks + kFlows);
    std::uniform_real_distribution<double> u(5.0, 20.0);
    for (int i = 0; i < kFlows; ++i) s.x[kLinks + i] = u(rng_);
    return s;
}

std::tuple<EnvState, double, bool> NsfnetEnv::step(const EnvState& s, const Action& a) {
    if (a.size() != kFlows) throw std::invalid_argument("NSFnet action dimension mismatch");
    const Vec load = routing() * a;
    if (load.maxCoeff() > kBandwidth + 1e-9 || a.minCoeff() < -1e-9)
        throw std::invalid_argument("infeasible NSFnet allocation reached the dynamics");

    double reward = 0.0;
    EnvState next;
    next.x = s.x;
    next.step_index = s.step_index + 1;
    std::uniform_real_distribution<double> drift(-1.0, 1.0);
    for (int i = 0; i < kFlows; ++i) {
        const double demand = s.x[kLinks + i];
        reward += std::min(a[i], demand) - kOverAllocTax * std::max(0.0, a[i] - demand);
        next.x[kLinks + i] = std::clamp(demand + drift(rng_), 1.0, 25.0);
    }
    next.x.head(kLinks) = load;
    const bool done = next.step_index >= horizon();
    next.done = done;
    return {next, reward, done};
}

// ---------------------------------------------------------------------------
// BallReach

EnvState BallReachEnv::reset(std::uint64_t seed) {
    rng_.seed(seed);
    EnvState s;
    s.x = Vec::Zero(4);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    do {
        for (int i = 0; i < 4; ++i) s.x[i] = u(rng_);
    } while ((s.x.head(2) - s.x.tail(2)).norm() < 0.1);
    return s;
}

std::tuple<EnvState, double, bool> BallReachEnv::step(const EnvState& s, const Action& a) {
    if (a.size() != 2) throw std::invalid_argument("BallReach action dimension mismatch");
    if (a.squaredNorm() > 0.05 + 1e-12)
        throw std::invalid_argument("infeasible BallReach action reached the dynamics");
    EnvState next;
    next.x = s.x;
    next.step_index = s.step_index + 1;
    next.x.head(2) = (s.x.head(2) + a).cwiseMax(-1.0).cwiseMin(1.0);
    const double dist = (next.x.head(2) - next.x.tail(2)).norm();
    const bool done = dist < kGoalTolerance || next.step_index >= horizon();
    next.done = done;
    return {next, -dist, done};
}

// ---------------------------------------------------------------------------
// Factory and constraint table

std::unique_ptr<Environment> make_environment(const std::string& env_id) {
    if (env_id == "BSS3z") return std::make_unique<BssEnv>(3, 90);
    if (env_id == "BSS5z") return std::make_unique<BssEnv>(5, 150);
    if (env_id == "NSFnetLite") return std::make_unique<NsfnetEnv>();
    if (env_id == "BallReach") return std::make_unique<BallReachEnv>();
    throw std::invalid_argument("unknown environment id: " + env_id);
}

ConstraintSpec constraint_spec_of(const std::string& env_id) {
    if (env_id == "BSS3z") return ConstraintSpec::signed_sum_band(90.0, 5.0, 40.0, 3);
    if (env_id == "BSS5z") return ConstraintSpec::signed_sum_band(150.0, 5.0, 40.0, 5);
    if (env_id == "NSFnetLite")
        return ConstraintSpec::linear_system(NsfnetEnv::routing(),
                                             Vec::Constant(NsfnetEnv::kLinks, NsfnetEnv::kBandwidth));
    if (env_id == "BallReach") return ConstraintSpec::ball(0.05, 2);
    if (env_id == "GridTab") {
        const TabularMdp m = grid_tab();
        return ConstraintSpec::finite_mask(m.feasible);
    }
    throw std::invalid_argument("unknown environment id: " + env_id);
}

// ---------------------------------------------------------------------------
// AUTO-MDP

std::tuple<EnvState, AugmentedReward, bool> augment_step(Environment& env,
                                                         const ConstraintSpec& spec,
                                                         const PenaltyConfig& cfg,
                                                         const EnvState& s, const Action& a) {
    cfg.validate();
    if (s.done) throw std::invalid_argument("augment_step on a terminal state");
    if (!is_feasible(spec, s, a)) return {s, AugmentedReward{0.0, -cfg.penalty}, false};
    auto [next, reward, done] = env.step(s, a);
    return {next, AugmentedReward{reward, 0.0}, done};
}

AutoMdp::AutoMdp(std::unique_ptr<Environment> env, ConstraintSpec spec, PenaltyConfig cfg)
    : env_(std::move(env)), spec_(std::move(spec)), cfg_(cfg) {
    cfg_.validate();
}

double AutoMdp::rescale(double raw) const {
    const auto [r_min, r_max] = env_->reward_bounds();
    return std::clamp((raw - r_min) / (r_max - r_min), 0.0, 1.0);
}

EnvState AutoMdp::reset(std::uint64_t seed) {
    steps_in_episode_ = 0;
    last_raw_reward_ = 0.0;
    return env_->reset(seed);
}

std::tuple<EnvState, AugmentedReward, bool, bool> AutoMdp::step(const EnvState& s,
                                                                const Action& a) {
    ++steps_in_episode_;
    const bool timeout = steps_in_episode_ >= env_->horizon();
    if (!is_feasible(spec_, s, a)) {
        // Self-loop: state returned bit-identical; the step still consumes
        // episode budget via steps_in_episode_.
        last_raw_reward_ = 0.0;
        return {s, AugmentedReward{0.0, -cfg_.penalty}, false, timeout};
    }
    auto [next, reward, done] = env_->step(s, a);
    last_raw_reward_ = reward;
    return {next, AugmentedReward{rescale(reward), 0.0}, done, timeout};
}

}  // namespace acrl
