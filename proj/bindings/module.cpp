#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "acrl/harness.hpp"
#include "acrl/tabular.hpp"

namespace py = pybind11;
using namespace acrl;

namespace {

EnvState make_state(const Vec& x) { return EnvState{x, 0, false}; }

ConstraintSpec spec_by_name(const std::string& env_id) { return constraint_spec_of(env_id); }

}  // namespace

PYBIND11_MODULE(acrl_py, m) {
    m.doc() = "action-constrained RL toolkit bindings";

    py::class_<Preference>(m, "Preference")
        .def(py::init(&Preference::of), py::arg("lambda_r"))
        .def_readonly("lambda_r", &Preference::lambda_r)
        .def_readonly("lambda_c", &Preference::lambda_c);

    py::class_<ConstraintSpec>(m, "ConstraintSpec");
    m.def("constraint_for_env", &spec_by_name, py::arg("env_id"));
    m.def("ball_constraint", &ConstraintSpec::ball, py::arg("radius"), py::arg("dim"));
    m.def("box_constraint", &ConstraintSpec::box, py::arg("low"), py::arg("high"));

    m.def(
        "is_feasible",
        [](const ConstraintSpec& spec, const Vec& x, const Vec& a) {
            return is_feasible(spec, make_state(x), a);
        },
        py::arg("spec"), py::arg("state"), py::arg("action"));

    m.def(
        "project",
        [](const ConstraintSpec& spec, const Vec& x, const Vec& a) {
            const ProjectionReport rep = project(spec, make_state(x), a);
            return py::make_tuple(rep.projected, rep.moved, rep.residual);
        },
        py::arg("spec"), py::arg("state"), py::arg("action"),
        "Returns (projected_action, moved, residual).");

    m.def(
        "scalarize",
        [](double lambda_r, double r, double c) {
            return scalarize(AugmentedReward{r, c}, Preference::of(lambda_r));
        },
        py::arg("lambda_r"), py::arg("r"), py::arg("c"));

    py::class_<TabularMdp>(m, "TabularMdp")
        .def_readonly("n_states", &TabularMdp::n_states)
        .def_readonly("n_actions", &TabularMdp::n_actions)
        .def_readonly("gamma", &TabularMdp::gamma);
    m.def("random_mdp",
          [](std::uint64_t seed, int max_states, int max_actions, double gamma) {
              Rng rng(seed);
              return random_mdp(rng, max_states, max_actions, gamma);
          },
          py::arg("seed"), py::arg("max_states") = 8, py::arg("max_actions") = 6,
          py::arg("gamma") = 0.99);
    m.def("grid_tab", &grid_tab);

    m.def(
        "verify_equivalence",
        [](const TabularMdp& mdp, double penalty, double lambda_r) {
            const EquivalenceReport rep =
                verify_equivalence(mdp, penalty, {Preference::of(lambda_r)}, 1e-9);
            return py::make_tuple(rep.ok, rep.max_value_gap);
        },
        py::arg("mdp"), py::arg("penalty"), py::arg("lambda_r"),
        "Returns (ok, max_value_gap) for one preference point.");

    m.def(
        "arm_sample_env",
        [](const std::string& env_id, std::uint64_t seed, double lambda_r, int max_attempts) {
            auto env = make_environment(env_id);
            const ConstraintSpec spec = constraint_spec_of(env_id);
            Rng rng(seed);
            GaussianPolicy policy = GaussianPolicy::make(env->state_dim(), env->action_low(),
                                                         env->action_high(), {64, 64}, rng);
            ArmConfig arm;
            arm.max_attempts = max_attempts;
            arm.fallback = ArmConfig::Fallback::Project;
            const EnvState s = env->reset(seed);
            const ArmResult res = arm_sample(policy, s, Preference::of(lambda_r), spec, arm, rng);
            return py::make_tuple(res.action, res.attempts, res.fallback_used);
        },
        py::arg("env_id"), py::arg("seed"), py::arg("lambda_r") = 0.9,
        py::arg("max_attempts") = 100,
        "Draw one feasible action with a fresh policy; returns (action, attempts, fallback).");

    py::class_<RunConfig>(m, "RunConfig")
        .def(py::init<>())
        .def_readwrite("env_id", &RunConfig::env_id)
        .def_readwrite("seed", &RunConfig::seed)
        .def_readwrite("total_steps", &RunConfig::total_steps)
        .def_readwrite("metrics_path", &RunConfig::metrics_path)
        .def_readwrite("checkpoint_path", &RunConfig::checkpoint_path);
    m.def("apply_override", &apply_override, py::arg("config"), py::arg("key"), py::arg("value"));
    m.def("run", &run, py::arg("config"), "Execute a run; returns the process exit code.");

    m.def(
        "verify_prop1",
        [](int instances, std::uint64_t seed) {
            std::ostringstream os;
            const int failures = verify_prop1(os, instances, seed);
            return py::make_tuple(failures, os.str());
        },
        py::arg("instances") = 10, py::arg("seed") = 0,
        "Returns (failure_count, json_lines).");
}
