#pragma once

#include <string>

#include "acrl/arm.hpp"
#include "acrl/environment.hpp"
#include "acrl/metrics.hpp"
#include "acrl/nets.hpp"
#include "acrl/replay.hpp"

namespace acrl {

struct TrainerConfig {
    double gamma = 0.99;
    double tau = 0.005;
    double lr = 3e-4;
    int batch = 256;
    int target_update_interval = 1;
    int gradient_steps = 1;
    double alpha = 0.2;
    double penalty = 0.1;  // K
    std::vector<int> hidden = {256, 256};
    std::size_t buffer_capacity = 1'000'000;
    double eta0 = 0.2;
    long eta_decay_interval = 10'000;
    double eta_decay_factor = 0.9;
    Preference eval_preference = Preference::of(0.9);
    int warmup_steps = 1000;
    int update_every = 1;         // environment steps per gradient phase
    int max_rejected_stored = 8;  // rejections pushed to D_a per env step
    ArmConfig arm;                // training-time ARM (max_attempts 100)
    long eval_interval = 1000;
    int eval_episodes = 10;

    void validate() const;
    /// Small-net configuration sized for quick CPU runs.
    static TrainerConfig desk();
};

/// Dirichlet(1,1) on the 2-simplex: lambda_r ~ Uniform(0,1).
Preference sample_preference(Rng& rng);

struct SacNets {
    GaussianPolicy policy;
    VectorCritic critic;
};

/// Column-major minibatch view of a list of transitions.
struct Batch {
    Mat S, A, S_next;
    Vec r, c, done;

    static Batch from(const std::vector<Transition>& ts);
    int size() const { return static_cast<int>(S.cols()); }
};

/// Scalar regression targets y = <lam, r~> + gamma (1 - done)
/// (min_twin <lam, Q_target(s', a')> - alpha log pi(a'|s')), a' reparameterized
/// with the supplied noise.
Vec critic_targets(const SacNets& nets, const Batch& batch, const Preference& lam,
                   const Mat& eps_next, double alpha, double gamma);

/// Mean over the batch of the squared scalarized TD error of both twins.
/// When grads are non-null they receive the parameter gradients.
double critic_loss(const SacNets& nets, const Batch& batch, const Preference& lam, const Vec& y,
                   Mlp::Grads* g1 = nullptr, Mlp::Grads* g2 = nullptr);

/// Mean of alpha log pi(a|s;lam) - <lam, Q_min(s, a; lam)> with a
/// reparameterized; the critic is held fixed.
double policy_loss(const SacNets& nets, const Mat& S, const Preference& lam, const Mat& eps,
                   double alpha, Mlp::Grads* gp = nullptr);

struct TrainLog {
    std::vector<MetricsRow> rows;
};

class Trainer {
public:
    enum class Algo { Aram, ProjectionBaseline };

    Trainer(const std::string& env_id, TrainerConfig cfg, Algo algo = Algo::Aram);

    TrainLog train(std::uint64_t seed, long total_steps);

    const SacNets& nets() const { return nets_; }
    SacNets& nets() { return nets_; }
    const DualReplay& replay() const { return replay_; }
    QpCounter& qp_counter() { return qp_; }
    AutoMdp& mdp() { return mdp_; }
    const TrainerConfig& config() const { return cfg_; }

    /// One Adam step on the critic twins; returns the pre-step loss.
    double critic_update(const Batch& batch, const Preference& lam);
    /// One Adam step on the policy with the critic frozen; pre-step loss.
    double policy_update(const Batch& batch, const Preference& lam);
    void soft_update_targets();

    void save_checkpoint(std::ostream& out) const;
    void load_checkpoint(std::istream& in);

private:
    void env_step_aram();
    void env_step_baseline();
    void maybe_reset(bool done, bool timeout);

    std::string env_id_;
    TrainerConfig cfg_;
    Algo algo_;
    AutoMdp mdp_;
    SacNets nets_;
    DualReplay replay_;
    Adam opt_q1_, opt_q2_, opt_policy_;
    QpCounter qp_;
    Rng rng_;
    EnvState state_;
    Preference lam_act_;
    long step_ = 0;
    double last_critic_loss_ = 0.0;
    double last_policy_loss_ = 0.0;
};

}  // namespace acrl
