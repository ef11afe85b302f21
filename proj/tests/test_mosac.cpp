#include <doctest.h>

#include <random>
#include <sstream>

#include "acrl/mosac.hpp"
#include "acrl/stats.hpp"

using namespace acrl;

namespace {

SacNets small_nets(int ds, int da, std::uint64_t seed, const std::vector<int>& hidden = {8, 8}) {
    Rng rng(seed);
    SacNets nets;
    nets.policy = GaussianPolicy::make(ds, Vec::Constant(da, -1.0), Vec::Constant(da, 1.0),
                                       hidden, rng);
    nets.critic = VectorCritic::make(ds, da, hidden, rng);
    return nets;
}

Batch random_batch(int ds, int da, int B, Rng& rng, double done_prob = 0.2) {
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<Transition> ts(B);
    for (auto& t : ts) {
        t.s = EnvState{Vec::NullaryExpr(ds, [&] { return g(rng); }), 0, false};
        t.a = Vec::NullaryExpr(da, [&] { return 0.5 * std::tanh(g(rng)); });
        const bool aug = u(rng) < 0.3;
        t.r = aug ? 0.0 : u(rng);
        t.c = aug ? -0.1 : 0.0;
        t.s_next = aug ? t.s : EnvState{Vec::NullaryExpr(ds, [&] { return g(rng); }), 1, false};
        t.done = !aug && u(rng) < done_prob;
        t.lam = Preference::of(u(rng));
    }
    return Batch::from(ts);
}

void zero_head(Mlp& m) {
    m.W.back().setZero();
    m.b.back().setZero();
}

double param_delta(const Mlp& a, const Mlp& b) {
    double d = 0.0;
    for (std::size_t l = 0; l < a.W.size(); ++l) {
        d = std::max(d, (a.W[l] - b.W[l]).cwiseAbs().maxCoeff());
        d = std::max(d, (a.b[l] - b.b[l]).cwiseAbs().maxCoeff());
    }
    return d;
}

}  // namespace

TEST_CASE("preference sampling is uniform on the simplex") {
    Rng rng(1);
    std::vector<double> xs;
    for (int k = 0; k < 100'000; ++k) {
        const auto lam = sample_preference(rng);
        CHECK(lam.lambda_r + lam.lambda_c == 1.0);
        CHECK(lam.on_simplex());
        xs.push_back(lam.lambda_r);
    }
    CHECK(ks_one_sample(xs, [](double x) { return std::clamp(x, 0.0, 1.0); }) > 0.01);
    Rng a(42), b(42);
    for (int k = 0; k < 100; ++k)
        CHECK(sample_preference(a).lambda_r == sample_preference(b).lambda_r);
}

TEST_CASE("terminal transitions bootstrap to the scalarized reward") {
    Rng rng(2);
    auto nets = small_nets(3, 2, 7);
    Batch batch = random_batch(3, 2, 16, rng);
    batch.done.setOnes();
    const auto lam = Preference::of(0.6);
    std::normal_distribution<double> g;
    const Mat eps = Mat::NullaryExpr(2, 16, [&] { return g(rng); });
    const Vec y = critic_targets(nets, batch, lam, eps, 0.2, 0.99);
    for (int i = 0; i < 16; ++i)
        CHECK(y[i] == doctest::Approx(0.6 * batch.r[i] + 0.4 * batch.c[i]).epsilon(1e-12));
}

TEST_CASE("zero critic and zero entropy reduce targets to the reward") {
    Rng rng(3);
    auto nets = small_nets(3, 2, 8);
    zero_head(nets.critic.target1);
    zero_head(nets.critic.target2);
    Batch batch = random_batch(3, 2, 8, rng);
    batch.r.setOnes();
    batch.c.setZero();
    batch.done.setZero();
    std::normal_distribution<double> g;
    const Mat eps = Mat::NullaryExpr(2, 8, [&] { return g(rng); });
    const Vec y = critic_targets(nets, batch, Preference{1.0, 0.0}, eps, 0.0, 0.99);
    for (int i = 0; i < 8; ++i) CHECK(y[i] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("targets are linear in the preference for a fixed twin and action") {
    Rng rng(4);
    auto nets = small_nets(3, 2, 9);
    nets.critic.target2 = nets.critic.target1;  // identical twins pin the min choice
    const Batch batch = random_batch(3, 2, 12, rng);
    std::normal_distribution<double> g;
    const Mat eps = Mat::NullaryExpr(2, 12, [&] { return g(rng); });
    const double alpha = 0.2, gamma = 0.99;
    const auto lam = Preference::of(0.3);

    // Per-objective pieces computed with the same reparameterized action.
    const auto next = nets.policy.sample_batch(batch.S_next, lam, eps);
    Mat X(3 + 2 + 2, 12);
    X.topRows(3) = batch.S_next;
    X.middleRows(3, 2) = next.A;
    X.row(5).setConstant(lam.lambda_r);
    X.row(6).setConstant(lam.lambda_c);
    const Mat Q = nets.critic.target1.apply_batch(X);
    const Vec y = critic_targets(nets, batch, lam, eps, alpha, gamma);
    for (int i = 0; i < 12; ++i) {
        const double yr = batch.r[i] + gamma * (1 - batch.done[i]) * Q(0, i);
        const double yc = batch.c[i] + gamma * (1 - batch.done[i]) * Q(1, i);
        const double entropy = gamma * (1 - batch.done[i]) * (-alpha * next.logp[i]);
        CHECK(y[i] ==
              doctest::Approx(lam.lambda_r * yr + lam.lambda_c * yc + entropy).epsilon(1e-9));
    }
}

TEST_CASE("repeated self-loop bootstrap converges to the closed form") {
    // Scalarized backup y <- lam_c * (-K) + gamma * y, the recursion induced by
    // an always-infeasible self-loop with entropy off.
    const double K = 0.1, gamma = 0.99;
    const auto lam = Preference::of(0.5);
    double y = 0.0;
    for (int t = 0; t < 20'000; ++t) y = lam.lambda_c * (-K) + gamma * y;
    CHECK(std::abs(y - lam.lambda_c * (-K) / (1.0 - gamma)) < 1e-6);
    CHECK(y == doctest::Approx(-5.0).epsilon(1e-7));
}

TEST_CASE("critic gradients match finite differences") {
    Rng rng(5);
    auto nets = small_nets(3, 2, 11);
    const Batch batch = random_batch(3, 2, 8, rng);
    const auto lam = Preference::of(0.35);
    std::normal_distribution<double> g;
    const Mat eps = Mat::NullaryExpr(2, 8, [&] { return g(rng); });
    const Vec y = critic_targets(nets, batch, lam, eps, 0.2, 0.99);

    Mlp::Grads g1 = Mlp::Grads::zeros_like(nets.critic.q1);
    Mlp::Grads g2 = Mlp::Grads::zeros_like(nets.critic.q2);
    critic_loss(nets, batch, lam, y, &g1, &g2);

    const double h = 1e-5;
    int checked = 0;
    for (std::size_t l = 0; l < nets.critic.q1.W.size(); ++l)
        for (int i = 0; i < nets.critic.q1.W[l].rows(); ++i)
            for (int j = 0; j < nets.critic.q1.W[l].cols(); ++j) {
                SacNets plus = nets, minus = nets;
                plus.critic.q1.W[l](i, j) += h;
                minus.critic.q1.W[l](i, j) -= h;
                const double fd =
                    (critic_loss(plus, batch, lam, y) - critic_loss(minus, batch, lam, y)) /
                    (2 * h);
                const double an = g1.dW[l](i, j);
                const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
                CHECK(std::abs(fd - an) / denom < 1e-4);
                ++checked;
            }
    CHECK(checked > 50);
}

TEST_CASE("policy gradients match finite differences") {
    Rng rng(6);
    auto nets = small_nets(3, 2, 13);
    std::normal_distribution<double> g;
    const Mat S = Mat::NullaryExpr(3, 8, [&] { return g(rng); });
    const Mat eps = Mat::NullaryExpr(2, 8, [&] { return g(rng); });
    const auto lam = Preference::of(0.45);
    const double alpha = 0.2;

    Mlp::Grads gp = Mlp::Grads::zeros_like(nets.policy.trunk);
    policy_loss(nets, S, lam, eps, alpha, &gp);

    const double h = 1e-5;
    for (std::size_t l = 0; l < nets.policy.trunk.W.size(); ++l) {
        for (int i = 0; i < nets.policy.trunk.W[l].rows(); ++i)
            for (int j = 0; j < nets.policy.trunk.W[l].cols(); ++j) {
                SacNets plus = nets, minus = nets;
                plus.policy.trunk.W[l](i, j) += h;
                minus.policy.trunk.W[l](i, j) -= h;
                const double fd =
                    (policy_loss(plus, S, lam, eps, alpha) -
                     policy_loss(minus, S, lam, eps, alpha)) /
                    (2 * h);
                const double an = gp.dW[l](i, j);
                const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
                CHECK(std::abs(fd - an) / denom < 1e-4);
            }
        for (int i = 0; i < nets.policy.trunk.b[l].size(); ++i) {
            SacNets plus = nets, minus = nets;
            plus.policy.trunk.b[l][i] += h;
            minus.policy.trunk.b[l][i] -= h;
            const double fd = (policy_loss(plus, S, lam, eps, alpha) -
                               policy_loss(minus, S, lam, eps, alpha)) /
                              (2 * h);
            const double an = gp.db[l][i];
            const double denom = std::max({std::abs(fd), std::abs(an), 1e-6});
            CHECK(std::abs(fd - an) / denom < 1e-4);
        }
    }
}

TEST_CASE("critic overfits a frozen batch") {
    Rng rng(7);
    TrainerConfig cfg = TrainerConfig::desk();
    cfg.hidden = {16, 16};
    cfg.batch = 16;
    cfg.lr = 1e-3;
    Trainer trainer("BallReach", cfg);
    Rng brng(8);
    const Batch batch = random_batch(4, 2, 16, brng);
    const auto lam = Preference::of(0.5);
    const double first = trainer.critic_update(batch, lam);
    double last = first;
    for (int k = 0; k < 99; ++k) last = trainer.critic_update(batch, lam);
    CHECK(last < first);
    CHECK(std::isfinite(last));
}

TEST_CASE("entropy rises when the critic is silent") {
    Rng rng(9);
    auto nets = small_nets(2, 1, 17);
    zero_head(nets.critic.q1);
    zero_head(nets.critic.q2);
    Adam opt(nets.policy.trunk, 3e-3);
    std::normal_distribution<double> g;
    const Mat S = Mat::NullaryExpr(2, 32, [&] { return g(rng); });
    auto mean_log_sigma = [&] {
        double acc = 0.0;
        for (int c = 0; c < S.cols(); ++c) {
            const Vec out = nets.policy.trunk.apply(
                nets.policy.trunk_input(EnvState{S.col(c), 0, false}, Preference::of(0.5)));
            acc += std::clamp(out[1], GaussianPolicy::kLogSigmaMin, GaussianPolicy::kLogSigmaMax);
        }
        return acc / S.cols();
    };
    // With a zeroed critic the loss is alpha * mean log-density, so a falling
    // loss on held-out noise means the policy's entropy is rising.
    const Mat eps0 = Mat::NullaryExpr(1, 32, [&] { return g(rng); });
    auto objective = [&] {
        return policy_loss(nets, S, Preference::of(0.5), eps0, 0.2, nullptr);
    };
    const double before = objective();
    for (int k = 0; k < 50; ++k) {
        const Mat eps = Mat::NullaryExpr(1, 32, [&] { return g(rng); });
        Mlp::Grads gp = Mlp::Grads::zeros_like(nets.policy.trunk);
        policy_loss(nets, S, Preference::of(0.5), eps, 0.2, &gp);
        opt.step(nets.policy.trunk, gp);
    }
    CHECK(objective() < before);
    CHECK(std::isfinite(mean_log_sigma()));
}

TEST_CASE("policy mean climbs toward the critic's peak on a bandit") {
    // Critic rewards actions near +0.6 through Q_r = -(a - 0.6)^2, built from a
    // fixed quadratic head the policy cannot change.
    Rng rng(10);
    auto nets = small_nets(1, 1, 19, {16, 16});
    // Fit the critic to the quadratic on a dense action grid.
    Adam copt(nets.critic.q1, 1e-2);
    std::uniform_real_distribution<double> ua(-1.0, 1.0);
    const auto lam = Preference::of(1.0 - 1e-9);
    for (int it = 0; it < 4000; ++it) {
        std::vector<Transition> ts(32);
        for (auto& t : ts) {
            t.s = EnvState{Vec::Zero(1), 0, false};
            const double a = ua(rng);
            t.a = Vec::Constant(1, a);
            t.r = -(a - 0.6) * (a - 0.6);
            t.c = 0.0;
            t.s_next = t.s;
            t.done = true;
            t.lam = lam;
        }
        const Batch b = Batch::from(ts);
        const Vec y = lam.lambda_r * b.r + lam.lambda_c * b.c;
        Mlp::Grads g1 = Mlp::Grads::zeros_like(nets.critic.q1);
        critic_loss(nets, b, lam, y, &g1, nullptr);
        copt.step(nets.critic.q1, g1);
    }
    nets.critic.q2 = nets.critic.q1;

    Adam popt(nets.policy.trunk, 3e-3);
    std::normal_distribution<double> g;
    const Mat S = Mat::Zero(1, 32);
    const EnvState s0{Vec::Zero(1), 0, false};
    const double before = std::abs(nets.policy.mean_action(s0, lam)[0] - 0.6);
    for (int k = 0; k < 500; ++k) {
        const Mat eps = Mat::NullaryExpr(1, 32, [&] { return g(rng); });
        Mlp::Grads gp = Mlp::Grads::zeros_like(nets.policy.trunk);
        policy_loss(nets, S, lam, eps, 0.05, &gp);
        popt.step(nets.policy.trunk, gp);
    }
    const double after = std::abs(nets.policy.mean_action(s0, lam)[0] - 0.6);
    CHECK(after < before);
    CHECK(after < 0.2);
}

TEST_CASE("training is deterministic per seed and inert at zero steps") {
    TrainerConfig cfg = TrainerConfig::desk();
    cfg.hidden = {16, 16};
    cfg.batch = 32;
    cfg.warmup_steps = 50;
    cfg.eval_interval = 100;
    cfg.eval_episodes = 1;

    Trainer t0("BallReach", cfg);
    const auto empty = t0.train(7, 0);
    CHECK(empty.rows.empty());

    Trainer t1("BallReach", cfg);
    Trainer t2("BallReach", cfg);
    const auto log1 = t1.train(7, 300);
    const auto log2 = t2.train(7, 300);
    REQUIRE(log1.rows.size() == log2.rows.size());
    CHECK(log1.rows.size() == 4);  // steps 0, 100, 200, 300
    for (std::size_t i = 0; i < log1.rows.size(); ++i) {
        CHECK(log1.rows[i].step == log2.rows[i].step);
        CHECK(log1.rows[i].eval_return == log2.rows[i].eval_return);
        CHECK(log1.rows[i].valid_action_rate == log2.rows[i].valid_action_rate);
        CHECK(log1.rows[i].qp_count_cum == log2.rows[i].qp_count_cum);
        CHECK(log1.rows[i].eta == log2.rows[i].eta);
        CHECK(log1.rows[i].critic_loss == log2.rows[i].critic_loss);
    }
    // qp_count_cum never decreases along a run.
    for (std::size_t i = 1; i < log1.rows.size(); ++i)
        CHECK(log1.rows[i].qp_count_cum >= log1.rows[i - 1].qp_count_cum);
    // Different seeds give different initial nets.
    Trainer t3("BallReach", cfg);
    t3.train(8, 1);
    CHECK(param_delta(t3.nets().policy.trunk, t1.nets().policy.trunk) > 0.0);
}

TEST_CASE("no infeasible action ever reaches the base dynamics") {
    TrainerConfig cfg = TrainerConfig::desk();
    cfg.hidden = {16, 16};
    cfg.batch = 32;
    cfg.warmup_steps = 50;
    cfg.eval_interval = 200;
    cfg.eval_episodes = 1;
    Trainer trainer("BSS3z", cfg);
    trainer.train(3, 400);
    CHECK(trainer.mdp().violation_count() == 0);
    // Every augmented transition stored is a self-loop with the exact penalty.
    const auto& replay = trainer.replay();
    for (std::size_t i = 0; i < replay.size_augmented(); ++i) {
        const auto& t = replay.augmented_at(i);
        CHECK(t.c == -cfg.penalty);
        CHECK(t.r == 0.0);
        CHECK((t.s_next.x - t.s.x).norm() == 0.0);
    }
}

TEST_CASE("trainer checkpoints restore the policy exactly") {
    TrainerConfig cfg = TrainerConfig::desk();
    cfg.hidden = {16, 16};
    cfg.batch = 32;
    cfg.warmup_steps = 50;
    cfg.eval_interval = 100;
    cfg.eval_episodes = 1;
    Trainer trainer("BallReach", cfg);
    trainer.train(5, 200);
    std::stringstream buf;
    trainer.save_checkpoint(buf);
    Trainer fresh("BallReach", cfg);
    fresh.load_checkpoint(buf);
    const EnvState s{Vec::Constant(4, 0.2), 0, false};
    CHECK((trainer.nets().policy.mean_action(s, Preference::of(0.9)) -
           fresh.nets().policy.mean_action(s, Preference::of(0.9))).norm() == 0.0);
}
