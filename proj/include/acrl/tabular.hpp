#pragma once

#include <random>
#include <string>
#include <vector>

#include "acrl/types.hpp"

namespace acrl {

using Rng = std::mt19937_64;

/// Finite MDP with a per-state feasible-action mask. Rewards live in [0,1].
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    double gamma = 0.99;
    std::vector<Vec> P;                       // P[s * n_actions + a] is a row over next states
    Mat R;                                    // n_states x n_actions
    std::vector<std::vector<bool>> feasible;  // at least one true per state

    const Vec& row(int s, int a) const { return P[static_cast<std::size_t>(s) * n_actions + a]; }
    void validate() const;
};

struct TabularSolution {
    Mat Q;                 // n_states x n_actions; -inf on infeasible entries
    std::vector<int> policy;
    Vec V;
    int iterations = 0;
};

struct AugmentedSolution {
    Mat Qr, Qc;            // per-objective action values of the AUTO-MDP
    std::vector<int> policy;
    Vec Vr, Vc;
    int iterations = 0;
};

/// Value iteration restricted to feasible actions. Greedy ties break to the
/// lowest action index.
TabularSolution vi_constrained(const TabularMdp& m, double tol = 1e-10);

/// Value iteration on the AUTO-MDP augmentation: all actions allowed,
/// infeasible (s,a) self-loops with reward [0, -K]; greedy w.r.t. the
/// lambda-scalarized vector value.
AugmentedSolution vi_augmented(const TabularMdp& m, const Preference& lam, double penalty,
                               double tol = 1e-10);

struct EquivalenceCounterexample {
    int state;
    Preference lam;
    std::string detail;
};

struct EquivalenceReport {
    bool ok = true;
    int lambdas_checked = 0;
    double max_value_gap = 0.0;
    std::vector<EquivalenceCounterexample> counterexamples;
};

/// Brute-force check that augmented-greedy policies are feasible and
/// first-component optimal. Only interior preferences (lambda_c > 0) are
/// asserted; boundary preferences are skipped.
EquivalenceReport verify_equivalence(const TabularMdp& m, double penalty,
                                     const std::vector<Preference>& lam_grid,
                                     double tol = 1e-10);

/// Exact evaluation of a deterministic feasible policy on the original MDP.
Vec evaluate_policy_exact(const TabularMdp& m, const std::vector<int>& policy, double tol = 1e-12);

/// Random instance with |S| <= max_states, |A| <= max_actions and roughly
/// 40% feasible actions (always at least one per state).
TabularMdp random_mdp(Rng& rng, int max_states = 8, int max_actions = 6, double gamma = 0.99);

/// 3x3 deterministic gridworld with off-grid moves masked infeasible.
TabularMdp grid_tab(double gamma = 0.9);

}  // namespace acrl
