#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qas/qsim.h"

namespace qas {

/// One entry of the discrete action set: a gate and the qubits it acts on
/// ((control, target) for CNOT).
struct GateAction {
    GateKind gate;
    std::vector<int> qubits;

    /// "H(1)", "U(0)", "CNOT(1,0)".
    std::string to_string() const;
    bool operator==(const GateAction&) const = default;
};

/// Parses the notation produced by GateAction::to_string. Gate names are
/// case-insensitive and "CX" is accepted for CNOT.
GateAction parse_gate_action(const std::string& text);

/// Per qubit ascending: U(pi/4), X, Y, Z, H; then every CNOT(i -> j), i != j,
/// ordered by (i, j). Holds 5n + n(n-1) actions.
class ActionSet {
  public:
    static ActionSet build(int n_qubits);

    int n_qubits() const { return n_qubits_; }
    std::size_t size() const { return actions_.size(); }
    const GateAction& operator[](std::size_t i) const { return actions_.at(i); }
    std::span<const GateAction> actions() const { return actions_; }

    /// Index of `action`, or nullopt if it is not part of the set.
    std::optional<std::size_t> index_of(const GateAction& action) const;

  private:
    int n_qubits_ = 0;
    std::vector<GateAction> actions_;
};

using Observation = std::vector<double>;

struct EnvConfig {
    int n_qubits = 2;
    PureState target = bell_state();
    double fidelity_threshold = 0.99;
    int max_steps = 20;
    NoiseSpec noise;
    double step_penalty = 0.01;
    // 0 keeps observations analytic; otherwise each Pauli expectation is
    // estimated from this many readout shots.
    int shots = 0;
    std::uint64_t shot_seed = 0;
    // Run the density-matrix path even without noise.
    bool force_density_matrix = false;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

struct StepResult {
    Observation observation;
    double reward = 0.0;
    bool done = false;
    double fidelity = 0.0;
    int steps_used = 0;
};

/// Circuit-construction environment. Each step appends one gate from the
/// action set to the circuit and reports Pauli X/Y/Z expectations for every
/// qubit (qubit-major, axes X, Y, Z).
class QuantumCircuitEnv {
  public:
    explicit QuantumCircuitEnv(EnvConfig config);

    Observation reset();
    StepResult step(std::size_t action_index);

    const EnvConfig& config() const { return config_; }
    const ActionSet& action_set() const { return actions_; }
    std::size_t action_count() const { return actions_.size(); }
    std::size_t observation_dim() const { return 3 * config_.n_qubits; }

    bool uses_density_matrix() const;
    bool done() const { return done_; }
    int steps_used() const { return steps_; }
    double current_fidelity() const;
    Observation observe();

  private:
    EnvConfig config_;
    ActionSet actions_;
    std::variant<PureState, MixedState> state_;
    std::mt19937_64 shot_rng_;
    int steps_ = 0;
    bool done_ = false;
};

// --- trajectories ------------------------------------------------------------

struct Transition {
    Observation state;
    std::size_t action = 0;
    double log_prob_old = 0.0;
    double reward = 0.0;
    bool done = false;
    double fidelity = 0.0;
};

using Trajectory = std::vector<Transition>;

using Policy = std::function<std::vector<double>(const Observation&)>;

/// Categorical draw by inverse CDF on one uniform variate. Throws if `probs`
/// is empty, has a negative entry, or does not sum to 1 within 1e-6.
std::size_t select_action(std::span<const double> probs, std::mt19937_64& rng);

/// Plays one episode from reset() with actions drawn from `policy`.
Trajectory episode_rollout(QuantumCircuitEnv& env, const Policy& policy,
                           std::uint64_t rng_seed);

}  // namespace qas
