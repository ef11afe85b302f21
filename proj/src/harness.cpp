#include "acrl/harness.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "acrl/stats.hpp"
#include "acrl/tabular.hpp"

namespace acrl {

void RunConfig::validate() const {
    if (trainer.eval_interval > total_steps && total_steps > 0)
        throw std::invalid_argument("eval_interval exceeds total_steps");
    if (mode != "train" && mode != "eval") throw std::invalid_argument("mode must be train|eval");
    trainer.validate();
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto as_long = [&] { return std::stol(value); };
    auto as_double = [&] { return std::stod(value); };
    if (key == "env") cfg.env_id = value;
    else if (key == "algo") {
        if (value == "aram") cfg.algo = Trainer::Algo::Aram;
        else if (value == "projection") cfg.algo = Trainer::Algo::ProjectionBaseline;
        else throw std::invalid_argument("algo must be aram|projection");
    }
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "steps") cfg.total_steps = as_long();
    else if (key == "metrics") cfg.metrics_path = value;
    else if (key == "checkpoint") cfg.checkpoint_path = value;
    else if (key == "mode") cfg.mode = value;
    else if (key == "gamma") cfg.trainer.gamma = as_double();
    else if (key == "tau") cfg.trainer.tau = as_double();
    else if (key == "lr") cfg.trainer.lr = as_double();
    else if (key == "batch") cfg.trainer.batch = static_cast<int>(as_long());
    else if (key == "alpha") cfg.trainer.alpha = as_double();
    else if (key == "penalty") cfg.trainer.penalty = as_double();
    else if (key == "eta0") cfg.trainer.eta0 = as_double();
    else if (key == "eta_decay_interval") cfg.trainer.eta_decay_interval = as_long();
    else if (key == "eta_decay_factor") cfg.trainer.eta_decay_factor = as_double();
    else if (key == "warmup_steps") cfg.trainer.warmup_steps = static_cast<int>(as_long());
    else if (key == "gradient_steps") cfg.trainer.gradient_steps = static_cast<int>(as_long());
    else if (key == "update_every") cfg.trainer.update_every = static_cast<int>(as_long());
    else if (key == "eval_interval") cfg.trainer.eval_interval = as_long();
    else if (key == "eval_episodes") cfg.trainer.eval_episodes = static_cast<int>(as_long());
    else if (key == "eval_preference") cfg.trainer.eval_preference = Preference::of(as_double());
    else if (key == "max_attempts") cfg.trainer.arm.max_attempts = static_cast<int>(as_long());
    else if (key == "hidden") {
        cfg.trainer.hidden.clear();
        std::stringstream ss(value);
        std::string tok;
        while (std::getline(ss, tok, 'x')) cfg.trainer.hidden.push_back(std::stoi(tok));
    }
    else throw std::invalid_argument("unknown config key: " + key);
}

RunConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    RunConfig cfg;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw std::invalid_argument("bad config line " + std::to_string(lineno));
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        apply_override(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return cfg;
}

int run(const RunConfig& cfg) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    try {
        if (cfg.mode == "eval") {
            Trainer trainer(cfg.env_id, cfg.trainer, cfg.algo);
            std::ifstream in(cfg.checkpoint_path, std::ios::binary);
            if (!in) {
                std::cerr << "config error: missing checkpoint " << cfg.checkpoint_path << "\n";
                return 2;
            }
            trainer.load_checkpoint(in);
            Rng rng(cfg.seed);
            const EvalResult ev =
                evaluate_policy(trainer.nets().policy, cfg.env_id, cfg.trainer.eval_preference,
                                cfg.trainer.eval_episodes, rng, &trainer.qp_counter());
            std::cout << "return=" << ev.mean_return
                      << " valid_rate=" << ev.valid_action_rate
                      << " inference_us=" << ev.per_action_inference_us
                      << " qp=" << ev.qp_used << "\n";
            return 0;
        }
        Trainer trainer(cfg.env_id, cfg.trainer, cfg.algo);
        const TrainLog log = trainer.train(cfg.seed, cfg.total_steps);
        std::ofstream csv(cfg.metrics_path, std::ios::binary);
        write_csv(csv, log.rows);
        std::ofstream ckpt(cfg.checkpoint_path, std::ios::binary);
        trainer.save_checkpoint(ckpt);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "run aborted: " << e.what() << "\n";
        return 1;
    }
}

BaselineStep projection_baseline_step(const GaussianPolicy& policy, const EnvState& s,
                                      const Preference& lam, const ConstraintSpec& spec, Rng& rng,
                                      QpCounter* qp) {
    BaselineStep out;
    out.a_raw = policy.sample(s, lam, rng).a;
    if (is_feasible(spec, s, out.a_raw)) {
        out.a_env = out.a_raw;
        return out;
    }
    out.a_env = project(spec, s, out.a_raw, qp).projected;
    out.qp_used = true;
    return out;
}

int verify_prop1(std::ostream& out, int instances, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Preference> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back(Preference::of(1.0 - i / 10.0));
    const double gammas[2] = {0.9, 0.99};
    const double penalties[3] = {0.05, 0.1, 0.2};
    int failures = 0;
    for (int i = 0; i < instances; ++i) {
        const double gamma = gammas[i % 2];
        const double penalty = penalties[i % 3];
        const TabularMdp m = random_mdp(rng, 8, 6, gamma);
        const EquivalenceReport report = verify_equivalence(m, penalty, grid, 1e-9);
        nlohmann::json j;
        j["instance"] = i;
        j["states"] = m.n_states;
        j["actions"] = m.n_actions;
        j["gamma"] = gamma;
        j["penalty"] = penalty;
        j["lambdas_checked"] = report.lambdas_checked;
        j["max_value_gap"] = report.max_value_gap;
        j["ok"] = report.ok;
        if (!report.ok) {
            ++failures;
            auto& ces = j["counterexamples"] = nlohmann::json::array();
            for (const auto& ce : report.counterexamples)
                ces.push_back({{"state", ce.state},
                               {"lambda_c", ce.lam.lambda_c},
                               {"detail", ce.detail}});
        }
        out << j.dump() << "\n";
    }
    return failures;
}

ArmBench bench_arm(const std::string& env_id, std::uint64_t seed, int steps) {
    auto env = make_environment(env_id);
    const ConstraintSpec spec = constraint_spec_of(env_id);
    Rng rng(seed);
    GaussianPolicy policy = GaussianPolicy::make(env->state_dim(), env->action_low(),
                                                 env->action_high(), {64, 64}, rng);
    ArmConfig arm;
    arm.max_attempts = 1;  // raw acceptance probe, no resampling
    arm.fallback = ArmConfig::Fallback::Project;

    EnvState s = env->reset(seed);
    long accepted = 0;
    std::vector<double> arm_norms, oracle_norms;
    ArmConfig full;
    full.max_attempts = 1000;
    full.fallback = ArmConfig::Fallback::Fail;
    for (int i = 0; i < steps; ++i) {
        const auto probe = policy.sample(s, Preference::of(0.9), rng);
        if (is_feasible(spec, s, probe.a)) ++accepted;
        try {
            const ArmResult res = arm_sample(policy, s, Preference::of(0.9), spec, full, rng);
            arm_norms.push_back(res.action.norm());
        } catch (const SamplingExhausted&) {
        }
        // brute-force filter oracle: iid draws kept only if feasible
        for (int k = 0; k < 1000; ++k) {
            const auto cand = policy.sample(s, Preference::of(0.9), rng);
            if (is_feasible(spec, s, cand.a)) {
                oracle_norms.push_back(cand.a.norm());
                break;
            }
        }
    }
    ArmBench bench;
    bench.draws = steps;
    bench.acceptance_rate = static_cast<double>(accepted) / steps;
    if (!arm_norms.empty() && !oracle_norms.empty())
        bench.ks_pvalue = ks_two_sample(arm_norms, oracle_norms);
    return bench;
}

}  // namespace acrl
