#include <cstdlib>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "acrl/harness.hpp"

namespace {

std::uint64_t default_seed() {
    if (const char* env = std::getenv("ACRL_SEED")) return std::stoull(env);
    return 0;
}

struct CommonFlags {
    std::string config_path;
    std::vector<std::string> overrides;  // key=value
    std::string env_id, algo;
    std::uint64_t seed = default_seed();
    bool seed_given = false;
    long steps = -1;
    std::string metrics_path, checkpoint_path;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "flat key=value config file");
    cmd->add_option("--set", f.overrides, "extra key=value overrides (flags win)");
    cmd->add_option("--env", f.env_id, "environment id");
    cmd->add_option("--algo", f.algo, "aram|projection");
    cmd->add_option("--seed", f.seed, "run seed (ACRL_SEED fallback)");
    cmd->add_option("--steps", f.steps, "total environment steps");
    cmd->add_option("--metrics", f.metrics_path, "metrics CSV output path");
    cmd->add_option("--checkpoint", f.checkpoint_path, "checkpoint path");
}

acrl::RunConfig build_config(const CommonFlags& f, const std::string& mode) {
    acrl::RunConfig cfg = f.config_path.empty() ? acrl::RunConfig{}
                                                : acrl::parse_config_file(f.config_path);
    for (const auto& kv : f.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("--set expects key=value");
        acrl::apply_override(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (!f.env_id.empty()) acrl::apply_override(cfg, "env", f.env_id);
    if (!f.algo.empty()) acrl::apply_override(cfg, "algo", f.algo);
    cfg.seed = f.seed;
    if (f.steps >= 0) cfg.total_steps = f.steps;
    if (!f.metrics_path.empty()) cfg.metrics_path = f.metrics_path;
    if (!f.checkpoint_path.empty()) cfg.checkpoint_path = f.checkpoint_path;
    cfg.mode = mode;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"action-constrained RL toolkit"};
    app.require_subcommand(1);

    CommonFlags train_flags, eval_flags, sweep_flags;
    auto* train_cmd = app.add_subcommand("train", "train a policy");
    add_common(train_cmd, train_flags);
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint");
    add_common(eval_cmd, eval_flags);

    auto* verify_cmd = app.add_subcommand("verify-prop1",
                                          "brute-force optimality-equivalence check");
    int instances = 50;
    std::uint64_t verify_seed = default_seed();
    verify_cmd->add_option("--instances", instances, "number of random MDPs");
    verify_cmd->add_option("--seed", verify_seed, "instance generator seed");

    auto* bench_cmd = app.add_subcommand("bench-arm", "acceptance-rate and KS statistics");
    std::string bench_env = "BallReach";
    std::uint64_t bench_seed = default_seed();
    int bench_steps = 500;
    bench_cmd->add_option("--env", bench_env, "environment id");
    bench_cmd->add_option("--seed", bench_seed, "seed");
    bench_cmd->add_option("--steps", bench_steps, "probe steps");

    auto* sweep_cmd = app.add_subcommand("sweep", "spawn per-seed runs as processes");
    add_common(sweep_cmd, sweep_flags);
    int sweep_seeds = 5;
    sweep_cmd->add_option("--seeds", sweep_seeds, "number of seeds, 0..n-1");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train_cmd->parsed()) return acrl::run(build_config(train_flags, "train"));
        if (eval_cmd->parsed()) return acrl::run(build_config(eval_flags, "eval"));
        if (verify_cmd->parsed()) {
            const int failures = acrl::verify_prop1(std::cout, instances, verify_seed);
            return failures == 0 ? 0 : 1;
        }
        if (bench_cmd->parsed()) {
            const acrl::ArmBench b = acrl::bench_arm(bench_env, bench_seed, bench_steps);
            std::cout << "acceptance_rate=" << b.acceptance_rate
                      << " ks_pvalue=" << b.ks_pvalue << " draws=" << b.draws << "\n";
            return 0;
        }
        if (sweep_cmd->parsed()) {
            for (int s = 0; s < sweep_seeds; ++s) {
                std::ostringstream cmd;
                cmd << argv[0] << " train --seed " << s;
                if (!sweep_flags.env_id.empty()) cmd << " --env " << sweep_flags.env_id;
                if (!sweep_flags.algo.empty()) cmd << " --algo " << sweep_flags.algo;
                if (sweep_flags.steps >= 0) cmd << " --steps " << sweep_flags.steps;
                if (!sweep_flags.config_path.empty()) cmd << " --config " << sweep_flags.config_path;
                cmd << " --metrics metrics_seed" << s << ".csv"
                    << " --checkpoint checkpoint_seed" << s << ".bin";
                std::cout << "[sweep] " << cmd.str() << "\n";
                const int rc = std::system(cmd.str().c_str());
                if (rc != 0) return 1;
            }
            return 0;
        }
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
