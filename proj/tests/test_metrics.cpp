#include <doctest.h>

#include <random>
#include <sstream>

#include "acrl/metrics.hpp"

using namespace acrl;

namespace {

GaussianPolicy flat_policy(int ds, const Vec& lo, const Vec& hi, const Vec& mu, double log_sigma) {
    Rng rng(0);
    GaussianPolicy p = GaussianPolicy::make(ds, lo, hi, {}, rng);
    p.trunk.W[0].setZero();
    p.trunk.b[0].head(mu.size()) = mu;
    p.trunk.b[0].tail(mu.size()).setConstant(log_sigma);
    return p;
}

}  // namespace

TEST_CASE("csv emission round-trips and keeps the column order") {
    std::vector<MetricsRow> rows(3);
    rows[0] = MetricsRow{0, 12.5, -42.0, 0.13, 7, 0.2, 0.0, 0.0, 3.25};
    rows[1] = MetricsRow{1000, 900.0, -17.125, 0.5, 19, 0.18, 0.031, -1.75, 2.5};
    rows[2] = MetricsRow{2000, 1800.25, 1e-17, 1.0, 19, 0.1458, 123456.789, 2.0, 0.875};

    std::stringstream buf;
    write_csv(buf, rows);
    const std::string text = buf.str();
    CHECK(text.rfind("step,wall_ms,eval_return,valid_action_rate,qp_count_cum,eta,critic_loss,"
                     "policy_loss,per_action_inference_us\r\n", 0) == 0);
    CHECK(text.find("\r\n") != std::string::npos);

    std::stringstream in(text);
    const auto parsed = read_csv(in);
    REQUIRE(parsed.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(parsed[i].step == rows[i].step);
        CHECK(parsed[i].wall_ms == rows[i].wall_ms);
        CHECK(parsed[i].eval_return == rows[i].eval_return);
        CHECK(parsed[i].valid_action_rate == rows[i].valid_action_rate);
        CHECK(parsed[i].qp_count_cum == rows[i].qp_count_cum);
        CHECK(parsed[i].eta == rows[i].eta);
        CHECK(parsed[i].critic_loss == rows[i].critic_loss);
        CHECK(parsed[i].policy_loss == rows[i].policy_loss);
        CHECK(parsed[i].per_action_inference_us == rows[i].per_action_inference_us);
    }
}

TEST_CASE("quoted fields survive parsing") {
    std::stringstream in("h\r\n\"1\",2,\"3.5\",0,1,0.2,0,0,\"4.5\"\r\n");
    const auto rows = read_csv(in);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].step == 1);
    CHECK(rows[0].eval_return == 3.5);
    CHECK(rows[0].per_action_inference_us == 4.5);
    std::stringstream bad("h\r\n1,2,3\r\n");
    CHECK_THROWS(read_csv(bad));
}

TEST_CASE("an always-feasible policy scores a perfect valid rate") {
    // Deterministic action at the origin, well inside Ball(0.05).
    GaussianPolicy p = flat_policy(4, Vec::Constant(2, -0.3), Vec::Constant(2, 0.3),
                                   Vec::Zero(2), -50.0);
    Rng rng(1);
    QpCounter qp;
    const auto res = evaluate_policy(p, "BallReach", Preference::of(0.9), 2, rng, &qp);
    CHECK(res.valid_action_rate == 1.0);
    CHECK(res.qp_used == 0);
    CHECK(res.per_action_inference_us > 0.0);
}

TEST_CASE("an always-infeasible policy projects every step") {
    // Mass pinned at the box corner (0.3, 0.3), squared norm 0.18 > 0.05.
    GaussianPolicy p = flat_policy(4, Vec::Constant(2, -0.3), Vec::Constant(2, 0.3),
                                   Vec::Constant(2, 50.0), -50.0);
    Rng rng(2);
    QpCounter qp;
    const auto res = evaluate_policy(p, "BallReach", Preference::of(0.9), 1, rng, &qp);
    CHECK(res.valid_action_rate == 0.0);
    CHECK(res.qp_used >= 50);  // one fallback projection per step of the episode
}

TEST_CASE("valid rate of a state-blind policy tracks the feasible mass") {
    // Zero trunk weights make the action law identical at every state, so the
    // 100-sample estimator should land on the policy's feasible mass.
    GaussianPolicy p = flat_policy(4, Vec::Constant(2, -0.3), Vec::Constant(2, 0.3),
                                   Vec::Zero(2), 0.0);
    const auto spec = ConstraintSpec::ball(0.05, 2);
    const auto lam = Preference::of(0.9);
    const EnvState s{Vec::Zero(4), 0, false};
    Rng mc(3);
    int feasible = 0;
    const int kDraws = 1'000'000;
    for (int k = 0; k < kDraws; ++k)
        if (is_feasible(spec, s, p.sample(s, lam, mc).a)) ++feasible;
    const double mass = static_cast<double>(feasible) / kDraws;

    Rng eval_rng(4);
    const auto res = evaluate_policy(p, "BallReach", lam, 3, eval_rng);
    CHECK(std::abs(res.valid_action_rate - mass) < 0.05);
}
