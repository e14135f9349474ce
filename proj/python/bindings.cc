#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <variant>

#include "qas/harness.h"

namespace py = pybind11;

namespace {

using TargetArg = std::variant<std::string, std::vector<qas::Complex>>;

qas::PureState to_target(const TargetArg& target) {
    if (const auto* name = std::get_if<std::string>(&target)) {
        return qas::resolve_target(*name);
    }
    return qas::PureState::from_amplitudes(
        std::get<std::vector<qas::Complex>>(target), 1e-6);
}

std::vector<qas::Complex> amplitudes(const qas::PureState& s) {
    return {s.amplitudes().begin(), s.amplitudes().end()};
}

py::dict step_info(const qas::StepResult& r) {
    py::dict info;
    info["fidelity"] = r.fidelity;
    info["steps_used"] = r.steps_used;
    return info;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Quantum circuit environment and RL agents";

    py::register_exception<qas::ConfigError>(m, "ConfigError", PyExc_ValueError);

    m.def("bell_state", [] { return amplitudes(qas::bell_state()); });
    m.def("ghz_state", [](int n) { return amplitudes(qas::ghz_state(n)); },
          py::arg("n_qubits"));
    m.def("fidelity",
          [](const std::vector<qas::Complex>& a, const std::vector<qas::Complex>& b) {
              return qas::fidelity(qas::PureState::from_amplitudes(a, 1e-6),
                                   qas::PureState::from_amplitudes(b, 1e-6));
          },
          py::arg("state"), py::arg("target"));
    m.def("action_set",
          [](int n) {
              const auto set = qas::ActionSet::build(n);
              std::vector<std::string> names;
              for (const auto& a : set.actions()) {
                  names.push_back(a.to_string());
              }
              return names;
          },
          py::arg("n_qubits"));
    m.def("discounted_returns",
          [](const std::vector<double>& rewards, double gamma,
             const std::vector<bool>& terminal) {
              return qas::discounted_returns(rewards, gamma, terminal);
          },
          py::arg("rewards"), py::arg("gamma"), py::arg("terminal"));

    py::class_<qas::QuantumCircuitEnv>(m, "Env")
        .def(py::init([](const TargetArg& target, double threshold, int max_steps,
                         double p_gate, double p_meas, double step_penalty,
                         int shots, std::uint64_t seed) {
                 qas::PureState t = to_target(target);
                 qas::EnvConfig c{.n_qubits = t.n_qubits(),
                                  .target = t,
                                  .fidelity_threshold = threshold,
                                  .max_steps = max_steps,
                                  .noise = {p_gate, p_meas},
                                  .step_penalty = step_penalty,
                                  .shots = shots,
                                  .shot_seed = seed};
                 return qas::QuantumCircuitEnv(std::move(c));
             }),
             py::arg("target") = std::string("bell"), py::arg("threshold") = 0.99,
             py::arg("max_steps") = 20, py::arg("p_gate") = 0.0,
             py::arg("p_meas") = 0.0, py::arg("step_penalty") = 0.01,
             py::arg("shots") = 0, py::arg("seed") = 0)
        .def("reset", &qas::QuantumCircuitEnv::reset)
        .def("step",
             [](qas::QuantumCircuitEnv& env, std::size_t action) {
                 qas::StepResult r = env.step(action);
                 return py::make_tuple(r.observation, r.reward, r.done, step_info(r));
             },
             py::arg("action"))
        .def_property_readonly("action_count", &qas::QuantumCircuitEnv::action_count)
        .def_property_readonly("observation_dim",
                               &qas::QuantumCircuitEnv::observation_dim)
        .def_property_readonly("n_qubits",
                               [](const qas::QuantumCircuitEnv& e) {
                                   return e.config().n_qubits;
                               })
        .def_property_readonly("actions",
                               [](const qas::QuantumCircuitEnv& e) {
                                   std::vector<std::string> names;
                                   for (const auto& a : e.action_set().actions()) {
                                       names.push_back(a.to_string());
                                   }
                                   return names;
                               })
        .def_property_readonly("fidelity", &qas::QuantumCircuitEnv::current_fidelity)
        .def_property_readonly("done", &qas::QuantumCircuitEnv::done);

    m.def("brute_force_search",
          [](const TargetArg& target, int max_depth,
             double threshold) -> std::optional<std::string> {
              const auto t = to_target(target);
              auto found = qas::brute_force_search(t.n_qubits(), t, max_depth,
                                                   threshold);
              if (!found) return std::nullopt;
              return found->to_string();
          },
          py::arg("target"), py::arg("max_depth"), py::arg("threshold") = 0.99);

    m.def("replay_circuit",
          [](const std::string& circuit, const TargetArg& target, double p_gate) {
              std::optional<qas::NoiseSpec> noise;
              if (p_gate > 0.0) noise = qas::NoiseSpec{p_gate, 0.0};
              const auto r =
                  qas::replay_circuit(qas::parse_circuit(circuit), to_target(target),
                                      noise);
              py::dict out;
              out["fidelity"] = r.noise_free_fidelity;
              out["noisy_fidelity"] = r.noisy_fidelity;
              out["diagram"] = r.diagram;
              return out;
          },
          py::arg("circuit"), py::arg("target") = std::string("bell"),
          py::arg("p_gate") = 0.0);

    m.def("train",
          [](const std::string& algorithm, const std::string& target, int episodes,
             std::uint64_t seed, double threshold, double p_gate, double p_meas,
             const std::map<std::string, std::string>& overrides) {
              qas::ConfigOverrides o(overrides);
              o["experiment.algorithm"] = algorithm;
              o["env.target"] = target;
              o["experiment.episodes"] = std::to_string(episodes);
              o["env.threshold"] = py::str(py::float_(threshold));
              o["env.p_gate"] = py::str(py::float_(p_gate));
              o["env.p_meas"] = py::str(py::float_(p_meas));
              qas::RunConfig config = qas::parse_config("", o);
              config.validate();
              qas::SeedOutcome outcome;
              {
                  py::gil_scoped_release release;
                  outcome = qas::run_seed(config, seed);
              }
              std::vector<double> returns, fidelities;
              std::vector<int> lengths;
              for (const auto& r : outcome.records) {
                  returns.push_back(r.episode_return);
                  fidelities.push_back(r.final_fidelity);
                  lengths.push_back(r.length);
              }
              py::dict out;
              out["returns"] = returns;
              out["fidelities"] = fidelities;
              out["lengths"] = lengths;
              out["greedy_circuit"] = outcome.greedy_circuit.to_string();
              out["greedy_fidelity"] = outcome.greedy_fidelity;
              return out;
          },
          py::arg("algorithm") = "ppo", py::arg("target") = "bell",
          py::arg("episodes") = 100, py::arg("seed") = 0, py::arg("threshold") = 0.99,
          py::arg("p_gate") = 0.0, py::arg("p_meas") = 0.0,
          py::arg("overrides") = std::map<std::string, std::string>{});
}
