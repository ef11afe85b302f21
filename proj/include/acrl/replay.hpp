#pragma once

#include <deque>
#include <iosfwd>
#include <random>
#include <vector>

#include "acrl/types.hpp"

namespace acrl {

using Rng = std::mt19937_64;

struct Transition {
    EnvState s;
    Action a;
    double r = 0.0;
    double c = 0.0;
    EnvState s_next;
    bool done = false;
    Preference lam;  // behavior preference, kept for diagnostics
};

struct NotWarmedUp : std::runtime_error {
    NotWarmedUp() : std::runtime_error("real replay buffer is empty") {}
};

/// Paired replay stores: D_r for feasible transitions, D_a for augmented
/// self-loop penalty transitions, mixed at a decaying ratio eta.
class DualReplay {
public:
    explicit DualReplay(std::size_t capacity = 1'000'000, double eta0 = 0.2,
                        long decay_interval = 10'000, double decay_factor = 0.9);

    /// Routes to D_a iff t.c < 0, else D_r. FIFO eviction at capacity.
    void push(Transition t);

    /// Forces a transition into D_r regardless of its penalty component.
    /// Used by the projection baseline, which has no self-loop semantics.
    void push_real(Transition t);

    /// floor(eta * batch) from D_a (clamped to availability), rest from D_r.
    std::vector<Transition> sample_mixed(int batch, Rng& rng) const;

    /// Call once per environment step; multiplies eta by the decay factor
    /// every decay_interval steps. Returns the current eta.
    double tick_decay();

    double eta() const { return eta_; }
    long steps_seen() const { return steps_seen_; }
    std::size_t size_real() const { return d_r_.size(); }
    std::size_t size_augmented() const { return d_a_.size(); }
    std::size_t capacity() const { return capacity_; }
    const Transition& real_at(std::size_t i) const { return d_r_[i]; }
    const Transition& augmented_at(std::size_t i) const { return d_a_[i]; }

    void save(std::ostream& out) const;
    static DualReplay load(std::istream& in);

private:
    std::size_t capacity_;
    double eta_;
    long decay_interval_;
    double decay_factor_;
    long steps_seen_ = 0;
    std::deque<Transition> d_r_, d_a_;
};

}  // namespace acrl
