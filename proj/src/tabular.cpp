#include "acrl/tabular.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace acrl {

namespace {
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}

void TabularMdp::validate() const {
    if (n_states <= 0 || n_actions <= 0) throw std::invalid_argument("empty MDP");
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma outside (0,1)");
    if (static_cast<int>(P.size()) != n_states * n_actions)
        throw std::invalid_argument("transition table size mismatch");
    for (const auto& p : P) {
        if (p.size() != n_states || std::abs(p.sum() - 1.0) > 1e-9 || p.minCoeff() < 0.0)
            throw std::invalid_argument("transition row is not a distribution");
    }
    if (R.rows() != n_states || R.cols() != n_actions)
        throw std::invalid_argument("reward table size mismatch");
    if (R.minCoeff() < 0.0 || R.maxCoeff() > 1.0)
        throw std::invalid_argument("rewards must lie in [0,1]");
    for (int s = 0; s < n_states; ++s) {
        bool any = false;
        for (int a = 0; a < n_actions; ++a) any = any || feasible[s][a];
        if (!any) throw std::invalid_argument("state with empty feasible set");
    }
}

TabularSolution vi_constrained(const TabularMdp& m, double tol) {
    m.validate();
    Vec V = Vec::Zero(m.n_states);
    Mat Q = Mat::Constant(m.n_states, m.n_actions, kNegInf);
    int it = 0;
    for (;; ++it) {
        Vec Vnew(m.n_states);
        for (int s = 0; s < m.n_states; ++s) {
            double best = kNegInf;
            for (int a = 0; a < m.n_actions; ++a) {
                if (!m.feasible[s][a]) continue;
                const double q = m.R(s, a) + m.gamma * m.row(s, a).dot(V);
                Q(s, a) = q;
                best = std::max(best, q);
            }
            Vnew[s] = best;
        }
        const double delta = (Vnew - V).cwiseAbs().maxCoeff();
        V = Vnew;
        if (delta < tol) break;
        if (it > 2'000'000) throw std::runtime_error("value iteration stalled");
    }
    TabularSolution sol;
    sol.V = V;
    sol.Q = Q;
    sol.iterations = it + 1;
    sol.policy.resize(m.n_states);
    for (int s = 0; s < m.n_states; ++s) {
        int best = -1;
        for (int a = 0; a < m.n_actions; ++a) {
            if (!m.feasible[s][a]) continue;
            if (best < 0 || Q(s, a) > Q(s, best)) best = a;
        }
        sol.policy[s] = best;
    }
    return sol;
}

AugmentedSolution vi_augmented(const TabularMdp& m, const Preference& lam, double penalty,
                               double tol) {
    m.validate();
    if (!lam.on_simplex()) throw std::invalid_argument("preference off the simplex");
    Vec Vr = Vec::Zero(m.n_states), Vc = Vec::Zero(m.n_states);
    Mat Qr = Mat::Zero(m.n_states, m.n_actions), Qc = Mat::Zero(m.n_states, m.n_actions);
    std::vector<int> pol(m.n_states, 0);
    int it = 0;
    for (;; ++it) {
        Vec Vr_new(m.n_states), Vc_new(m.n_states);
        for (int s = 0; s < m.n_states; ++s) {
            int best = 0;
            double best_val = kNegInf;
            for (int a = 0; a < m.n_actions; ++a) {
                if (m.feasible[s][a]) {
                    Qr(s, a) = m.R(s, a) + m.gamma * m.row(s, a).dot(Vr);
                    Qc(s, a) = m.gamma * m.row(s, a).dot(Vc);
                } else {
                    Qr(s, a) = m.gamma * Vr[s];
                    Qc(s, a) = -penalty + m.gamma * Vc[s];
                }
                const double v = scalarize(Qr(s, a), Qc(s, a), lam);
                if (v > best_val) {
                    best_val = v;
                    best = a;
                }
            }
            pol[s] = best;
            Vr_new[s] = Qr(s, best);
            Vc_new[s] = Qc(s, best);
        }
        const double delta = std::max((Vr_new - Vr).cwiseAbs().maxCoeff(),
                                      (Vc_new - Vc).cwiseAbs().maxCoeff());
        Vr = Vr_new;
        Vc = Vc_new;
        if (delta < tol) break;
        if (it > 2'000'000) throw std::runtime_error("augmented value iteration stalled");
    }
    AugmentedSolution sol;
    sol.Qr = Qr;
    sol.Qc = Qc;
    sol.Vr = Vr;
    sol.Vc = Vc;
    sol.policy = pol;
    sol.iterations = it + 1;
    return sol;
}

Vec evaluate_policy_exact(const TabularMdp& m, const std::vector<int>& policy, double tol) {
    Vec V = Vec::Zero(m.n_states);
    for (int it = 0;; ++it) {
        Vec Vnew(m.n_states);
        for (int s = 0; s < m.n_states; ++s) {
            const int a = policy[s];
            Vnew[s] = m.R(s, a) + m.gamma * m.row(s, a).dot(V);
        }
        const double delta = (Vnew - V).cwiseAbs().maxCoeff();
        V = Vnew;
        if (delta < tol) break;
        if (it > 5'000'000) throw std::runtime_error("policy evaluation stalled");
    }
    return V;
}

EquivalenceReport verify_equivalence(const TabularMdp& m, double penalty,
                                     const std::vector<Preference>& lam_grid, double tol) {
    // A sup-norm change below tol*(1-gamma) bounds the value error by ~tol.
    const double vi_tol = tol * (1.0 - m.gamma);
    const TabularSolution opt = vi_constrained(m, vi_tol);
    EquivalenceReport report;
    for (const auto& lam : lam_grid) {
        if (lam.lambda_c <= 0.0) continue;  // boundary: feasibility not provable
        ++report.lambdas_checked;
        const AugmentedSolution aug = vi_augmented(m, lam, penalty, vi_tol);
        bool all_feasible = true;
        for (int s = 0; s < m.n_states; ++s) {
            if (!m.feasible[s][aug.policy[s]]) {
                all_feasible = false;
                std::ostringstream msg;
                msg << "augmented-greedy picks infeasible action " << aug.policy[s];
                report.counterexamples.push_back({s, lam, msg.str()});
            }
        }
        if (!all_feasible) continue;
        const Vec V_pol = evaluate_policy_exact(m, aug.policy);
        for (int s = 0; s < m.n_states; ++s) {
            const double gap = std::abs(V_pol[s] - opt.V[s]);
            report.max_value_gap = std::max(report.max_value_gap, gap);
            if (gap > 10.0 * tol) {
                std::ostringstream msg;
                msg << "value gap " << gap << " vs constrained optimum";
                report.counterexamples.push_back({s, lam, msg.str()});
            }
        }
    }
    report.ok = report.counterexamples.empty();
    return report;
}

TabularMdp random_mdp(Rng& rng, int max_states, int max_actions, double gamma) {
    std::uniform_int_distribution<int> s_dist(2, max_states), a_dist(2, max_actions);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    TabularMdp m;
    m.n_states = s_dist(rng);
    m.n_actions = a_dist(rng);
    m.gamma = gamma;
    m.R = Mat::NullaryExpr(m.n_states, m.n_actions, [&] { return u(rng); });
    m.P.resize(static_cast<std::size_t>(m.n_states) * m.n_actions);
    for (auto& p : m.P) {
        p = Vec::NullaryExpr(m.n_states, [&] { return u(rng) + 1e-3; });
        p /= p.sum();
    }
    m.feasible.assign(m.n_states, std::vector<bool>(m.n_actions, false));
    for (int s = 0; s < m.n_states; ++s) {
        for (int a = 0; a < m.n_actions; ++a) m.feasible[s][a] = u(rng) < 0.4;
        bool any = false;
        for (int a = 0; a < m.n_actions; ++a) any = any || m.feasible[s][a];
        if (!any) m.feasible[s][std::uniform_int_distribution<int>(0, m.n_actions - 1)(rng)] = true;
    }
    return m;
}

TabularMdp grid_tab(double gamma) {
    constexpr int kSide = 3;
    constexpr int kStates = kSide * kSide;
    constexpr int kGoal = kStates - 1;
    // actions: 0=up, 1=right, 2=down, 3=left
    constexpr int dr[4] = {-1, 0, 1, 0};
    constexpr int dc[4] = {0, 1, 0, -1};
    TabularMdp m;
    m.n_states = kStates;
    m.n_actions = 4;
    m.gamma = gamma;
    m.R = Mat::Zero(kStates, 4);
    m.P.resize(kStates * 4);
    m.feasible.assign(kStates, std::vector<bool>(4, false));
    for (int s = 0; s < kStates; ++s) {
        const int r = s / kSide, c = s % kSide;
        for (int a = 0; a < 4; ++a) {
            const int nr = r + dr[a], nc = c + dc[a];
            const bool in_grid = nr >= 0 && nr < kSide && nc >= 0 && nc < kSide;
            m.feasible[s][a] = in_grid;
            Vec p = Vec::Zero(kStates);
            const int next = (s == kGoal || !in_grid) ? s : nr * kSide + nc;
            p[next] = 1.0;
            m.P[static_cast<std::size_t>(s) * 4 + a] = p;
            if (in_grid && next == kGoal && s != kGoal) m.R(s, a) = 1.0;
        }
    }
    return m;
}

}  // namespace acrl
