#include "qas/env.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qas {

std::string GateAction::to_string() const {
    std::ostringstream out;
    out << gate.name() << '(';
    for (std::size_t i = 0; i < qubits.size(); ++i) {
        if (i) out << ',';
        out << qubits[i];
    }
    out << ')';
    return out.str();
}

GateAction parse_gate_action(const std::string& text) {
    const auto open = text.find('(');
    const auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos ||
        close < open) {
        throw std::invalid_argument("malformed gate \"" + text + "\"");
    }
    std::string name = text.substr(0, open);
    name.erase(std::remove_if(name.begin(), name.end(),
                              [](unsigned char c) { return std::isspace(c); }),
               name.end());
    std::transform(name.begin(), name.end(), name.begin(),
                   [](unsigned char c) { return std::toupper(c); });

    GateAction action;
    if (name == "U") {
        action.gate = GateKind::phase_rot(std::numbers::pi / 4);
    } else if (name == "X") {
        action.gate = GateKind::x();
    } else if (name == "Y") {
        action.gate = GateKind::y();
    } else if (name == "Z") {
        action.gate = GateKind::z();
    } else if (name == "H") {
        action.gate = GateKind::h();
    } else if (name == "CNOT" || name == "CX") {
        action.gate = GateKind::cnot();
    } else {
        throw std::invalid_argument("unknown gate \"" + name + "\"");
    }

    std::string args = text.substr(open + 1, close - open - 1);
    std::replace(args.begin(), args.end(), ',', ' ');
    std::istringstream in(args);
    int q = 0;
    while (in >> q) action.qubits.push_back(q);
    if (!in.eof() ||
        static_cast<int>(action.qubits.size()) != action.gate.arity()) {
        throw std::invalid_argument("bad qubit list in \"" + text + "\"");
    }
    return action;
}

ActionSet ActionSet::build(int n_qubits) {
    if (n_qubits < 2) {
        throw std::invalid_argument("action set needs at least 2 qubits");
    }
    ActionSet set;
    set.n_qubits_ = n_qubits;
    for (int q = 0; q < n_qubits; ++q) {
        set.actions_.push_back({GateKind::phase_rot(std::numbers::pi / 4), {q}});
        set.actions_.push_back({GateKind::x(), {q}});
        set.actions_.push_back({GateKind::y(), {q}});
        set.actions_.push_back({GateKind::z(), {q}});
        set.actions_.push_back({GateKind::h(), {q}});
    }
    for (int c = 0; c < n_qubits; ++c) {
        for (int t = 0; t < n_qubits; ++t) {
            if (c != t) set.actions_.push_back({GateKind::cnot(), {c, t}});
        }
    }
    return set;
}

std::optional<std::size_t> ActionSet::index_of(const GateAction& action) const {
    for (std::size_t i = 0; i < actions_.size(); ++i) {
        if (actions_[i] == action) return i;
    }
    return std::nullopt;
}

void EnvConfig::validate() const {
    if (n_qubits < 2) throw std::invalid_argument("n_qubits must be >= 2");
    if (target.n_qubits() != n_qubits) {
        throw std::invalid_argument("target has " +
                                    std::to_string(target.n_qubits()) +
                                    " qubits, environment has " +
                                    std::to_string(n_qubits));
    }
    if (!(fidelity_threshold > 0.0 && fidelity_threshold <= 1.0)) {
        throw std::invalid_argument("fidelity_threshold must lie in (0, 1]");
    }
    if (max_steps < 1) throw std::invalid_argument("max_steps must be >= 1");
    if (shots < 0) throw std::invalid_argument("shots must be >= 0");
    noise.validate();
}

QuantumCircuitEnv::QuantumCircuitEnv(EnvConfig config)
    : config_(std::move(config)),
      state_(PureState(2)),
      shot_rng_(config_.shot_seed) {
    config_.validate();
    actions_ = ActionSet::build(config_.n_qubits);
    if (actions_.size() == 0) throw std::invalid_argument("empty action set");
    reset();
}

bool QuantumCircuitEnv::uses_density_matrix() const {
    return config_.force_density_matrix || !config_.noise.noiseless();
}

Observation QuantumCircuitEnv::reset() {
    if (uses_density_matrix()) {
        state_ = MixedState(config_.n_qubits);
    } else {
        state_ = PureState(config_.n_qubits);
    }
    steps_ = 0;
    done_ = false;
    return observe();
}

double QuantumCircuitEnv::current_fidelity() const {
    return std::visit([&](const auto& s) { return fidelity(s, config_.target); },
                      state_);
}

Observation QuantumCircuitEnv::observe() {
    Observation obs;
    obs.reserve(observation_dim());
    for (int q = 0; q < config_.n_qubits; ++q) {
        for (Axis axis : {Axis::X, Axis::Y, Axis::Z}) {
            const double exact = std::visit(
                [&](const auto& s) { return pauli_expectation(s, q, axis); },
                state_);
            if (config_.shots > 0) {
                obs.push_back(sampled_expectation(exact, config_.noise.p_meas,
                                                  config_.shots, shot_rng_));
            } else {
                obs.push_back(
                    readout_damped_expectation(exact, config_.noise.p_meas));
            }
        }
    }
    return obs;
}

StepResult QuantumCircuitEnv::step(std::size_t action_index) {
    if (action_index >= actions_.size()) {
        throw std::out_of_range("action index " + std::to_string(action_index) +
                                " out of range (" +
                                std::to_string(actions_.size()) + " actions)");
    }
    if (done_) throw std::logic_error("step() called on a finished episode");

    const GateAction& action = actions_[action_index];
    if (auto* mixed = std::get_if<MixedState>(&state_)) {
        *mixed = apply_gate(*mixed, action.gate, action.qubits, config_.noise);
    } else {
        auto& pure = std::get<PureState>(state_);
        pure = apply_gate(pure, action.gate, action.qubits);
    }
    ++steps_;

    StepResult result;
    result.fidelity = current_fidelity();
    result.steps_used = steps_;
    if (result.fidelity >= config_.fidelity_threshold) {
        result.reward = result.fidelity - config_.step_penalty;
        result.done = true;
    } else {
        result.reward = -config_.step_penalty;
        result.done = steps_ >= config_.max_steps;
    }
    done_ = result.done;
    result.observation = observe();
    return result;
}

std::size_t select_action(std::span<const double> probs, std::mt19937_64& rng) {
    if (probs.empty()) throw std::invalid_argument("empty distribution");
    double total = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument("probabilities must be non-negative");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-6) {
        throw std::invalid_argument("probabilities must sum to 1");
    }
    const double u = std::uniform_real_distribution<double>(0.0, total)(rng);
    double cumulative = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        cumulative += probs[i];
        if (u < cumulative) return i;
    }
    // u landed in the rounding gap at the top; return the last nonzero entry.
    for (std::size_t i = probs.size(); i-- > 0;) {
        if (probs[i] > 0.0) return i;
    }
    return probs.size() - 1;
}

Trajectory episode_rollout(QuantumCircuitEnv& env, const Policy& policy,
                           std::uint64_t rng_seed) {
    std::mt19937_64 rng(rng_seed);
    Trajectory trajectory;
    Observation obs = env.reset();
    bool done = false;
    while (!done) {
        const std::vector<double> probs = policy(obs);
        if (probs.size() != env.action_count()) {
            throw std::invalid_argument("policy returned " +
                                        std::to_string(probs.size()) +
                                        " probabilities for " +
                                        std::to_string(env.action_count()) +
                                        " actions");
        }
        const std::size_t action = select_action(probs, rng);
        StepResult r = env.step(action);
        trajectory.push_back({std::move(obs), action, std::log(probs[action]),
                              r.reward, r.done, r.fidelity});
        obs = std::move(r.observation);
        done = r.done;
    }
    return trajectory;
}

}  // namespace qas
