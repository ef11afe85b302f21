#include "acrl/metrics.hpp"

#include <chrono>
#include <istream>
#include <ostream>
#include <sstream>

namespace acrl {

namespace {

const char* kHeader =
    "step,wall_ms,eval_return,valid_action_rate,qp_count_cum,eta,critic_loss,policy_loss,"
    "per_action_inference_us";

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\r\n") == std::string::npos) return raw;
    std::string quoted = "\"";
    for (char ch : raw) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    quoted += '"';
    return quoted;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::vector<std::string> split_record(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                cur += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<MetricsRow>& rows) {
    out << kHeader << "\r\n";
    for (const auto& r : rows) {
        out << csv_field(std::to_string(r.step)) << ',' << csv_field(fmt(r.wall_ms)) << ','
            << csv_field(fmt(r.eval_return)) << ',' << csv_field(fmt(r.valid_action_rate)) << ','
            << csv_field(std::to_string(r.qp_count_cum)) << ',' << csv_field(fmt(r.eta)) << ','
            << csv_field(fmt(r.critic_loss)) << ',' << csv_field(fmt(r.policy_loss)) << ','
            << csv_field(fmt(r.per_action_inference_us)) << "\r\n";
    }
}

std::vector<MetricsRow> read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty metrics file");
    std::vector<MetricsRow> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto f = split_record(line);
        if (f.size() != 9) throw std::runtime_error("malformed metrics row");
        MetricsRow r;
        r.step = std::stol(f[0]);
        r.wall_ms = std::stod(f[1]);
        r.eval_return = std::stod(f[2]);
        r.valid_action_rate = std::stod(f[3]);
        r.qp_count_cum = std::stoull(f[4]);
        r.eta = std::stod(f[5]);
        r.critic_loss = std::stod(f[6]);
        r.policy_loss = std::stod(f[7]);
        r.per_action_inference_us = std::stod(f[8]);
        rows.push_back(r);
    }
    return rows;
}

EvalResult evaluate_policy(const GaussianPolicy& policy, const std::string& env_id,
                           const Preference& lam, int episodes, Rng& rng, QpCounter* qp) {
    auto env = make_environment(env_id);
    const ConstraintSpec spec = constraint_spec_of(env_id);
    ArmConfig arm;
    arm.max_attempts = 10;
    arm.fallback = ArmConfig::Fallback::Project;

    double total_return = 0.0;
    double valid_sum = 0.0;
    double inference_ns = 0.0;
    long steps = 0;
    std::uniform_int_distribution<std::uint64_t> any;
    const std::uint64_t before = qp ? qp->count.load() : 0;

    for (int ep = 0; ep < episodes; ++ep) {
        EnvState s = env->reset(any(rng));
        double ep_return = 0.0;
        for (int t = 0; t < env->horizon(); ++t) {
            int feasible = 0;
            for (int k = 0; k < 100; ++k) {
                const auto cand = policy.sample(s, lam, rng);
                if (is_feasible(spec, s, cand.a)) ++feasible;
            }
            valid_sum += feasible / 100.0;

            const auto tic = std::chrono::steady_clock::now();
            const ArmResult res = arm_sample(policy, s, lam, spec, arm, rng, qp);
            inference_ns += std::chrono::duration<double, std::nano>(
                                std::chrono::steady_clock::now() - tic).count();
            ++steps;

            auto [next, reward, done] = env->step(s, res.action);
            ep_return += reward;
            s = next;
            if (done) break;
        }
        total_return += ep_return;
    }
    EvalResult out;
    out.mean_return = total_return / episodes;
    out.valid_action_rate = steps > 0 ? valid_sum / steps : 0.0;
    out.per_action_inference_us = steps > 0 ? inference_ns / steps / 1000.0 : 0.0;
    out.qp_used = qp ? qp->count.load() - before : 0;
    return out;
}

}  // namespace acrl
