#include <doctest.h>

#include <random>

#include "acrl/projection.hpp"

using namespace acrl;

namespace {

EnvState st() { return EnvState{Vec::Zero(1), 0, false}; }

Vec v2(double a, double b) {
    Vec x(2);
    x << a, b;
    return x;
}

Vec v3(double a, double b, double c) {
    Vec x(3);
    x << a, b, c;
    return x;
}

// Sampled nearest-feasible oracle: the projection may not lose to any feasible
// sample by more than tol.
double oracle_min_distance(const ConstraintSpec& spec, const Vec& a, int n, std::mt19937_64& rng,
                           double span) {
    std::uniform_real_distribution<double> u(-span, span);
    double best = std::numeric_limits<double>::infinity();
    Vec x(a.size());
    for (int k = 0; k < n; ++k) {
        for (int i = 0; i < a.size(); ++i) x[i] = u(rng);
        if (is_feasible(spec, EnvState{Vec::Zero(1), 0, false}, x))
            best = std::min(best, (x - a).norm());
    }
    return best;
}

}  // namespace

TEST_CASE("ball projection rescales radially") {
    Vec a = v2(3.0, 4.0);
    Vec p = project_ball(a, 1.0);
    CHECK(p[0] == doctest::Approx(0.6).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(0.8).epsilon(1e-12));
    Vec inside = v2(0.1, 0.1);
    CHECK((project_ball(inside, 0.05) - inside).norm() == 0.0);
}

TEST_CASE("ball projection beats a dense sampled oracle in 8-D") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 2.0);
    const auto spec = ConstraintSpec::ball(2.0, 8);
    Vec a = Vec::NullaryExpr(8, [&] { return g(rng); });
    Vec p = project_ball(a, 2.0);
    CHECK(is_feasible(spec, st(), p));
    const double oracle = oracle_min_distance(spec, a, 1'000'000, rng, std::sqrt(2.0));
    CHECK((p - a).norm() <= oracle + 1e-3);
}

TEST_CASE("box projection clamps componentwise") {
    Vec p = project_box(v2(2.0, -2.0), Vec::Constant(2, -1.0), Vec::Constant(2, 1.0));
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -1.0);
    Vec inside = v2(0.3, -0.9);
    CHECK((project_box(inside, Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)) - inside).norm() ==
          0.0);
    CHECK_THROWS_AS(project_box(v2(0, 0), Vec::Zero(3), Vec::Ones(3)), std::invalid_argument);
}

TEST_CASE("halfspace projection matches the closed form") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    for (int k = 0; k < 200; ++k) {
        Vec a = Vec::NullaryExpr(4, [&] { return g(rng); });
        Vec w = Vec::NullaryExpr(4, [&] { return g(rng); });
        const double b = g(rng);
        Vec p = project_halfspace(a, w, b);
        Vec expect = a - std::max(0.0, w.dot(a) - b) / w.squaredNorm() * w;
        CHECK((p - expect).norm() < 1e-10);
        CHECK(w.dot(p) <= b + 1e-9);
    }
}

TEST_CASE("weighted L1 projection is feasible and oracle-optimal") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.5);
    Vec w = v3(1.0, 2.0, 0.5);
    const auto spec = ConstraintSpec::weighted_abs_sum(w, 1.0);
    for (int k = 0; k < 20; ++k) {
        Vec a = Vec::NullaryExpr(3, [&] { return g(rng); });
        Vec p = project_weighted_abs_sum(a, w, 1.0);
        CHECK(constraint_residual(spec, st(), p) <= 1e-9);
        const double oracle = oracle_min_distance(spec, a, 200'000, rng, 2.0);
        CHECK((p - a).norm() <= oracle + 1e-3);
    }
}

TEST_CASE("dykstra handles the band-and-box intersection") {
    std::vector<ConstraintSpec> sets;
    sets.push_back(ConstraintSpec::box(Vec::Zero(3), Vec::Constant(3, 40.0)));
    Mat up(1, 3), dn(1, 3);
    up.setOnes();
    dn.setConstant(-1.0);
    sets.push_back(ConstraintSpec::linear_system(up, Vec::Constant(1, 95.0)));
    sets.push_back(ConstraintSpec::linear_system(dn, Vec::Constant(1, -85.0)));

    Vec a = v3(50.0, 50.0, 50.0);
    const auto rep = project_dykstra(a, st(), sets);
    CHECK(rep.moved);
    for (const auto& set : sets) CHECK(is_feasible(set, st(), rep.projected));

    // Sampled feasible points never undercut the projected distance.
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 40.0);
    const double d = (rep.projected - a).norm();
    int feasible_draws = 0;
    for (int k = 0; k < 100'000 || feasible_draws < 1000; ++k) {
        Vec x = Vec::NullaryExpr(3, [&] { return u(rng); });
        const double s = x.sum();
        if (s < 85.0 || s > 95.0) continue;
        ++feasible_draws;
        CHECK(d <= (x - a).norm() + 1e-6);
        if (k > 2'000'000) break;
    }
    CHECK(feasible_draws >= 1000);
}

TEST_CASE("dykstra on a feasible input is a fixed point") {
    std::vector<ConstraintSpec> sets;
    sets.push_back(ConstraintSpec::ball(1.0, 2));
    sets.push_back(ConstraintSpec::box(Vec::Constant(2, -1.0), Vec::Constant(2, 1.0)));
    const auto rep = project_dykstra(v2(0.1, 0.1), st(), sets);
    CHECK_FALSE(rep.moved);
    CHECK(rep.iterations == 1);
    CHECK(rep.residual == 0.0);
}

TEST_CASE("dykstra on a single halfspace equals the analytic projection") {
    Mat w(1, 2);
    w << 2.0, -1.0;
    std::vector<ConstraintSpec> sets{ConstraintSpec::linear_system(w, Vec::Constant(1, 0.5))};
    Vec a = v2(3.0, 1.0);
    const auto rep = project_dykstra(a, st(), sets);
    Vec expect = project_halfspace(a, w.row(0).transpose(), 0.5);
    CHECK((rep.projected - expect).norm() < 1e-10);
}

TEST_CASE("projection is idempotent") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> g(0.0, 3.0);
    std::vector<ConstraintSpec> specs;
    specs.push_back(ConstraintSpec::ball(0.5, 4));
    specs.push_back(ConstraintSpec::box(Vec::Constant(4, -0.3), Vec::Constant(4, 0.7)));
    specs.push_back(ConstraintSpec::weighted_abs_sum(Vec::Ones(4), 1.0));
    for (const auto& spec : specs) {
        for (int k = 0; k < 50; ++k) {
            Vec a = Vec::NullaryExpr(4, [&] { return g(rng); });
            Vec p1 = project(spec, st(), a).projected;
            Vec p2 = project(spec, st(), p1).projected;
            CHECK((p2 - p1).norm() < 1e-9);
        }
    }
}

TEST_CASE("ball and box projections are non-expansive") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> g(0.0, 2.0);
    for (int k = 0; k < 500; ++k) {
        Vec a = Vec::NullaryExpr(3, [&] { return g(rng); });
        Vec b = Vec::NullaryExpr(3, [&] { return g(rng); });
        CHECK((project_ball(a, 1.0) - project_ball(b, 1.0)).norm() <= (a - b).norm() + 1e-12);
        const Vec lo = Vec::Constant(3, -0.5), hi = Vec::Constant(3, 0.5);
        CHECK((project_box(a, lo, hi) - project_box(b, lo, hi)).norm() <= (a - b).norm() + 1e-12);
    }
}

TEST_CASE("non-convex positive-part projection matches the sampled oracle") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g(0.0, 1.5);
    const auto spec = ConstraintSpec::positive_part_sum(v3(1.0, -2.0, 1.5), 1.0);
    for (int k = 0; k < 10; ++k) {
        Vec a = Vec::NullaryExpr(3, [&] { return g(rng); });
        const auto rep = project(spec, st(), a);
        CHECK(constraint_residual(spec, st(), rep.projected) <= 1e-8);
        const double oracle = oracle_min_distance(spec, a, 400'000, rng, 3.0);
        CHECK((rep.projected - a).norm() <= oracle + 1e-3);
    }
}

TEST_CASE("generic project dispatch handles every supported form") {
    std::mt19937_64 rng(37);
    std::normal_distribution<double> g(0.0, 30.0);
    const auto band = ConstraintSpec::signed_sum_band(90.0, 5.0, 40.0, 3);
    for (int k = 0; k < 20; ++k) {
        Vec a = Vec::NullaryExpr(3, [&] { return std::abs(g(rng)); });
        const auto rep = project(band, st(), a);
        CHECK(is_feasible(band, st(), rep.projected));
    }
    Mat A(2, 3);
    A << 1, 1, 0, 0, 1, 1;
    const auto lin = ConstraintSpec::linear_system(A, v2(1.0, 1.0));
    for (int k = 0; k < 20; ++k) {
        Vec a = Vec::NullaryExpr(3, [&] { return g(rng) / 10.0; });
        const auto rep = project(lin, st(), a);
        CHECK(constraint_residual(lin, st(), rep.projected) <= 1e-6);
    }
    // Index 0 is masked out, so the projection has to reach the throwing path.
    const auto mask = ConstraintSpec::finite_mask({{false, true}});
    CHECK_THROWS_AS(project(mask, st(), Vec::Zero(1)), std::invalid_argument);
}

TEST_CASE("every generic projection increments the counters") {
    QpCounter local;
    const auto before = global_qp_counter().count.load();
    const auto spec = ConstraintSpec::ball(1.0, 2);
    project(spec, st(), v2(5.0, 0.0), &local);
    project(spec, st(), v2(0.0, 0.1), &local);  // feasible input still counts one solve
    CHECK(local.count.load() == 2);
    CHECK(global_qp_counter().count.load() == before + 2);
}
