#include "acrl/mosac.hpp"

#include <chrono>
#include <cmath>

namespace acrl {

void TrainerConfig::validate() const {
    if (gamma <= 0.0 || gamma >= 1.0) throw std::invalid_argument("gamma outside (0,1)");
    if (tau <= 0.0 || tau > 1.0) throw std::invalid_argument("tau outside (0,1]");
    if (lr <= 0.0) throw std::invalid_argument("non-positive learning rate");
    if (batch <= 0) throw std::invalid_argument("non-positive batch");
    if (alpha < 0.0) throw std::invalid_argument("negative entropy coefficient");
    if (penalty <= 0.0) throw std::invalid_argument("penalty must be positive");
    if (!eval_preference.on_simplex()) throw std::invalid_argument("eval preference off simplex");
    arm.validate();
}

TrainerConfig TrainerConfig::desk() {
    TrainerConfig cfg;
    cfg.hidden = {64, 64};
    cfg.batch = 64;
    cfg.warmup_steps = 500;
    cfg.eval_episodes = 5;
    cfg.eval_interval = 2000;
    // Rewards are rescaled to [0,1]; at that scale the full-size entropy
    // coefficient drowns the task signal, and gamma = 0.99 inflates values
    // past what small nets resolve in 30k steps. Extra gradient steps, a
    // faster learning rate, and a heavier penalty-batch mix compensate for
    // the short step budget on thin feasible sets.
    cfg.alpha = 0.03;
    cfg.gamma = 0.85;
    cfg.lr = 5e-4;
    cfg.gradient_steps = 3;
    cfg.eta0 = 0.4;
    return cfg;
}

Preference sample_preference(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    return Preference::of(u(rng));
}

Batch Batch::from(const std::vector<Transition>& ts) {
    if (ts.empty()) throw std::invalid_argument("empty batch");
    const int B = static_cast<int>(ts.size());
    const int ds = static_cast<int>(ts[0].s.x.size());
    const int da = static_cast<int>(ts[0].a.size());
    Batch b;
    b.S = Mat(ds, B);
    b.A = Mat(da, B);
    b.S_next = Mat(ds, B);
    b.r = Vec(B);
    b.c = Vec(B);
    b.done = Vec(B);
    for (int i = 0; i < B; ++i) {
        b.S.col(i) = ts[i].s.x;
        b.A.col(i) = ts[i].a;
        b.S_next.col(i) = ts[i].s_next.x;
        b.r[i] = ts[i].r;
        b.c[i] = ts[i].c;
        b.done[i] = ts[i].done ? 1.0 : 0.0;
    }
    return b;
}

namespace {

Mat critic_input(const Mat& S, const Mat& A, const Preference& lam) {
    Mat X(S.rows() + A.rows() + 2, S.cols());
    X.topRows(S.rows()) = S;
    X.middleRows(S.rows(), A.rows()) = A;
    X.row(S.rows() + A.rows()).setConstant(lam.lambda_r);
    X.row(S.rows() + A.rows() + 1).setConstant(lam.lambda_c);
    return X;
}

Vec scalarize_batch(const Mat& Q, const Preference& lam) {
    return lam.lambda_r * Q.row(0).transpose() + lam.lambda_c * Q.row(1).transpose();
}

}  // namespace

Vec critic_targets(const SacNets& nets, const Batch& batch, const Preference& lam,
                   const Mat& eps_next, double alpha, double gamma) {
    const auto next = nets.policy.sample_batch(batch.S_next, lam, eps_next);
    const Mat X = critic_input(batch.S_next, next.A, lam);
    const Vec q1 = scalarize_batch(nets.critic.target1.apply_batch(X), lam);
    const Vec q2 = scalarize_batch(nets.critic.target2.apply_batch(X), lam);
    const Vec v = q1.cwiseMin(q2) - alpha * next.logp;
    return lam.lambda_r * batch.r + lam.lambda_c * batch.c +
           gamma * (Vec::Ones(batch.size()) - batch.done).cwiseProduct(v);
}

double critic_loss(const SacNets& nets, const Batch& batch, const Preference& lam, const Vec& y,
                   Mlp::Grads* g1, Mlp::Grads* g2) {
    const int B = batch.size();
    const Mat X = critic_input(batch.S, batch.A, lam);
    double loss = 0.0;
    const Mlp* heads[2] = {&nets.critic.q1, &nets.critic.q2};
    Mlp::Grads* grads[2] = {g1, g2};
    for (int j = 0; j < 2; ++j) {
        Mlp::Cache cache;
        const Mat Q = heads[j]->forward(X, cache);
        const Vec e = scalarize_batch(Q, lam) - y;
        loss += e.squaredNorm() / B;
        if (grads[j]) {
            Mat upstream(2, B);
            upstream.row(0) = (2.0 / B) * lam.lambda_r * e.transpose();
            upstream.row(1) = (2.0 / B) * lam.lambda_c * e.transpose();
            heads[j]->backward(cache, upstream, *grads[j]);
        }
    }
    return loss;
}

double policy_loss(const SacNets& nets, const Mat& S, const Preference& lam, const Mat& eps,
                   double alpha, Mlp::Grads* gp) {
    const int B = static_cast<int>(S.cols());
    const int ds = static_cast<int>(S.rows());
    const int da = nets.policy.da;
    const auto bs = nets.policy.sample_batch(S, lam, eps);
    const Mat X = critic_input(S, bs.A, lam);

    Mlp::Cache cache1, cache2;
    const Mat Q1 = nets.critic.q1.forward(X, cache1);
    const Mat Q2 = nets.critic.q2.forward(X, cache2);
    const Vec qs1 = scalarize_batch(Q1, lam);
    const Vec qs2 = scalarize_batch(Q2, lam);
    const Vec qmin = qs1.cwiseMin(qs2);

    const double loss = (alpha * bs.logp - qmin).mean();
    if (!gp) return loss;

    // dL/dA through the minimizing twin only; critic parameters stay fixed.
    Mat up1 = Mat::Zero(2, B), up2 = Mat::Zero(2, B);
    for (int b = 0; b < B; ++b) {
        auto& up = (qs1[b] <= qs2[b]) ? up1 : up2;
        up(0, b) = -lam.lambda_r / B;
        up(1, b) = -lam.lambda_c / B;
    }
    Mlp::Grads sink1 = Mlp::Grads::zeros_like(nets.critic.q1);
    Mlp::Grads sink2 = Mlp::Grads::zeros_like(nets.critic.q2);
    const Mat dX = nets.critic.q1.backward(cache1, up1, sink1) +
                   nets.critic.q2.backward(cache2, up2, sink2);
    const Mat dA = dX.middleRows(ds, da);

    // Chain through a = c + h tanh(u), u = mu + sigma eps, and the explicit
    // log-probability terms: dlogp/du = 2 tanh(u), dlogp/dlog_sigma = -1.
    Mat dU(da, B);
    for (int i = 0; i < da; ++i) {
        const double half = 0.5 * (nets.policy.hi[i] - nets.policy.lo[i]);
        dU.row(i) = (alpha / B) * 2.0 * bs.Tanh.row(i).array() +
                    dA.row(i).array() * half *
                        (1.0 - bs.Tanh.row(i).array().square());
    }
    const Mat sig_eps = bs.U - bs.Mu;  // sigma .* eps
    Mat dLogSigma = dU.cwiseProduct(sig_eps);
    dLogSigma.array() -= alpha / B;
    // Clamped log-sigma outputs pass no gradient.
    const Mat raw_ls = bs.cache.acts.back().bottomRows(da);
    const Mat mask = ((raw_ls.array() > GaussianPolicy::kLogSigmaMin) &&
                      (raw_ls.array() < GaussianPolicy::kLogSigmaMax))
                         .cast<double>();
    dLogSigma = dLogSigma.cwiseProduct(mask);

    Mat upstream(2 * da, B);
    upstream.topRows(da) = dU;
    upstream.bottomRows(da) = dLogSigma;
    nets.policy.trunk.backward(bs.cache, upstream, *gp);
    return loss;
}

// ---------------------------------------------------------------------------
// Trainer

namespace {

SacNets build_nets(const Environment& env, const TrainerConfig& cfg, Rng& rng) {
    SacNets nets;
    nets.policy = GaussianPolicy::make(env.state_dim(), env.action_low(), env.action_high(),
                                       cfg.hidden, rng);
    nets.critic = VectorCritic::make(env.state_dim(), env.action_dim(), cfg.hidden, rng);
    return nets;
}

Rng seeded(std::uint64_t seed) {
    Rng rng(seed);
    return rng;
}

}  // namespace

Trainer::Trainer(const std::string& env_id, TrainerConfig cfg, Algo algo)
    : env_id_(env_id),
      cfg_(std::move(cfg)),
      algo_(algo),
      mdp_(make_environment(env_id), constraint_spec_of(env_id),
           PenaltyConfig{cfg_.penalty, cfg_.gamma}),
      nets_([&] {
          cfg_.validate();
          Rng init_rng = seeded(0xACC01ADEULL);
          return build_nets(mdp_.env(), cfg_, init_rng);
      }()),
      replay_(cfg_.buffer_capacity, cfg_.eta0, cfg_.eta_decay_interval, cfg_.eta_decay_factor),
      opt_q1_(nets_.critic.q1, cfg_.lr),
      opt_q2_(nets_.critic.q2, cfg_.lr),
      opt_policy_(nets_.policy.trunk, cfg_.lr) {}

double Trainer::critic_update(const Batch& batch, const Preference& lam) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat eps_next = Mat::NullaryExpr(nets_.policy.da, batch.size(), [&] { return g(rng_); });
    const Vec y = critic_targets(nets_, batch, lam, eps_next, cfg_.alpha, cfg_.gamma);
    Mlp::Grads g1 = Mlp::Grads::zeros_like(nets_.critic.q1);
    Mlp::Grads g2 = Mlp::Grads::zeros_like(nets_.critic.q2);
    const double loss = critic_loss(nets_, batch, lam, y, &g1, &g2);
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite critic loss");
    opt_q1_.step(nets_.critic.q1, g1);
    opt_q2_.step(nets_.critic.q2, g2);
    return loss;
}

double Trainer::policy_update(const Batch& batch, const Preference& lam) {
    std::normal_distribution<double> g(0.0, 1.0);
    Mat eps = Mat::NullaryExpr(nets_.policy.da, batch.size(), [&] { return g(rng_); });
    Mlp::Grads gp = Mlp::Grads::zeros_like(nets_.policy.trunk);
    const double loss = policy_loss(nets_, batch.S, lam, eps, cfg_.alpha, &gp);
    if (!std::isfinite(loss)) throw std::runtime_error("non-finite policy loss");
    opt_policy_.step(nets_.policy.trunk, gp);
    return loss;
}

void Trainer::soft_update_targets() {
    soft_update(nets_.critic.target1, nets_.critic.q1, cfg_.tau);
    soft_update(nets_.critic.target2, nets_.critic.q2, cfg_.tau);
}

void Trainer::maybe_reset(bool done, bool timeout) {
    if (done || timeout) {
        std::uniform_int_distribution<std::uint64_t> any;
        state_ = mdp_.reset(any(rng_));
    }
}

void Trainer::env_step_aram() {
    const bool warming = step_ <= cfg_.warmup_steps;
    Action accepted;
    std::vector<Action> rejected;
    if (warming) {
        // Uniform feasible exploration before learning starts.
        const Vec lo = mdp_.env().action_low(), hi = mdp_.env().action_high();
        std::uniform_real_distribution<double> u(0.0, 1.0);
        Action a(lo.size());
        for (int tries = 0;; ++tries) {
            for (int i = 0; i < a.size(); ++i) a[i] = lo[i] + (hi[i] - lo[i]) * u(rng_);
            if (is_feasible(mdp_.spec(), state_, a)) break;
            if (tries > 100000) {
                a = project(mdp_.spec(), state_, a, &qp_).projected;
                break;
            }
        }
        accepted = a;
    } else {
        ArmResult res =
            arm_sample(nets_.policy, state_, lam_act_, mdp_.spec(), cfg_.arm, rng_, &qp_);
        accepted = res.action;
        rejected = std::move(res.rejected);
    }
    int stored = 0;
    for (const auto& bad : rejected) {
        if (stored++ >= cfg_.max_rejected_stored) break;
        replay_.push(Transition{state_, bad, 0.0, -cfg_.penalty, state_, false, lam_act_});
    }
    auto [next, rw, done, timeout] = mdp_.step(state_, accepted);
    replay_.push(Transition{state_, accepted, rw.r, rw.c, next, done, lam_act_});
    state_ = next;
    maybe_reset(done, timeout);
}

void Trainer::env_step_baseline() {
    Action a_raw;
    bool projected = false;
    if (step_ <= cfg_.warmup_steps) {
        const Vec lo = mdp_.env().action_low(), hi = mdp_.env().action_high();
        std::uniform_real_distribution<double> u(0.0, 1.0);
        a_raw = Action(lo.size());
        for (int i = 0; i < a_raw.size(); ++i) a_raw[i] = lo[i] + (hi[i] - lo[i]) * u(rng_);
    } else {
        a_raw = nets_.policy.sample(state_, lam_act_, rng_).a;
    }
    Action a_env = a_raw;
    if (!is_feasible(mdp_.spec(), state_, a_env)) {
        a_env = project(mdp_.spec(), state_, a_env, &qp_).projected;
        projected = true;
    }
    auto [next, rw, done, timeout] = mdp_.step(state_, a_env);
    // Pre-projected action with the penalty in the violation component.
    Transition t{state_, a_raw, rw.r, projected ? -cfg_.penalty : 0.0, next, done, lam_act_};
    replay_.push_real(std::move(t));
    state_ = next;
    maybe_reset(done, timeout);
}

TrainLog Trainer::train(std::uint64_t seed, long total_steps) {
    TrainLog log;
    if (total_steps <= 0) return log;
    rng_.seed(seed);
    {
        Rng init_rng = seeded(seed ^ 0xACC01ADEULL);
        nets_ = build_nets(mdp_.env(), cfg_, init_rng);
        opt_q1_ = Adam(nets_.critic.q1, cfg_.lr);
        opt_q2_ = Adam(nets_.critic.q2, cfg_.lr);
        opt_policy_ = Adam(nets_.policy.trunk, cfg_.lr);
    }
    qp_.count = 0;
    std::uniform_int_distribution<std::uint64_t> any;
    state_ = mdp_.reset(any(rng_));
    lam_act_ = cfg_.eval_preference;
    last_critic_loss_ = last_policy_loss_ = 0.0;

    const auto t0 = std::chrono::steady_clock::now();
    auto emit = [&](long step) {
        Rng eval_rng(seed ^ (0x9e3779b97f4a7c15ULL + 0x100000001b3ULL * (step + 1)));
        const EvalResult ev = evaluate_policy(nets_.policy, env_id_, cfg_.eval_preference,
                                              cfg_.eval_episodes, eval_rng, &qp_);
        MetricsRow row;
        row.step = step;
        row.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t0).count();
        row.eval_return = ev.mean_return;
        row.valid_action_rate = ev.valid_action_rate;
        row.qp_count_cum = qp_.count.load();
        row.eta = replay_.eta();
        row.critic_loss = last_critic_loss_;
        row.policy_loss = last_policy_loss_;
        row.per_action_inference_us = ev.per_action_inference_us;
        log.rows.push_back(row);
    };
    emit(0);

    for (step_ = 1; step_ <= total_steps; ++step_) {
        lam_act_ = sample_preference(rng_);
        if (algo_ == Algo::Aram)
            env_step_aram();
        else
            env_step_baseline();
        replay_.tick_decay();

        if (step_ > cfg_.warmup_steps && step_ % cfg_.update_every == 0 &&
            replay_.size_real() > 0) {
            for (int g = 0; g < cfg_.gradient_steps; ++g) {
                const Preference lam = sample_preference(rng_);
                const Batch batch = Batch::from(replay_.sample_mixed(cfg_.batch, rng_));
                last_critic_loss_ = critic_update(batch, lam);
                last_policy_loss_ = policy_update(batch, lam);
                if (step_ % cfg_.target_update_interval == 0) soft_update_targets();
            }
        }
        if (step_ % cfg_.eval_interval == 0 || step_ == total_steps) emit(step_);
    }
    return log;
}

void Trainer::save_checkpoint(std::ostream& out) const {
    nets_.policy.save(out);
    nets_.critic.save(out);
}

void Trainer::load_checkpoint(std::istream& in) {
    nets_.policy = GaussianPolicy::load(in);
    nets_.critic = VectorCritic::load(in);
    nets_.critic.ds = nets_.policy.ds;
    nets_.critic.da = nets_.policy.da;
}

}  // namespace acrl
