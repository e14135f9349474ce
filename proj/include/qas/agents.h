#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qas/env.h"
#include "qas/nn.h"

namespace qas {

enum class Algorithm { A2C, PPO };

std::string to_string(Algorithm algo);
/// Accepts "a2c" / "ppo" in any case.
Algorithm parse_algorithm(const std::string& name);

struct AgentHyper {
    double gamma = 0.99;
    double learning_rate = 0.002;
    double clip = 0.2;       // PPO only
    int epochs = 4;          // PPO only
    int horizon = 1000;      // PPO only: env steps per update
    double value_coef = 0.5;
    double entropy_coef = 0.01;

    static AgentHyper a2c_defaults();
    static AgentHyper ppo_defaults();
    static AgentHyper defaults_for(Algorithm algo);

    /// Throws std::invalid_argument naming the first bad field.
    void validate(Algorithm algo) const;
};

/// Separate actor (softmax head) and critic (scalar head) networks, each with
/// its own Adam moments.
struct ActorCritic {
    Mlp actor;
    Mlp critic;
    AdamState actor_opt;
    AdamState critic_opt;

    static ActorCritic initialized(int obs_dim, int action_count,
                                   std::mt19937_64& rng);
};

struct LossReport {
    double total = 0.0;
    double policy = 0.0;
    double value = 0.0;
    double entropy = 0.0;  // A2C: summed over steps; PPO: mean per step
};

struct LossGradients {
    LossReport loss;
    std::vector<double> actor_grad;
    std::vector<double> critic_grad;
};

/// R_t = r_t + gamma R_{t+1}, restarting at every terminal flag. The last
/// element is always treated as the end of an episode.
std::vector<double> discounted_returns(std::span<const double> rewards,
                                       double gamma,
                                       const std::vector<bool>& terminal);
std::vector<double> discounted_returns(const Trajectory& trajectory,
                                       double gamma);

/// Mean over steps of -log pi(a|s) A + value_coef (V - R)^2, minus
/// entropy_coef times the entropy summed over steps. Advantages are held
/// constant in the policy term.
LossGradients a2c_loss(const Trajectory& trajectory, const ActorCritic& model,
                       const AgentHyper& hyper);

/// Mean over steps of -min(q A, clip(q, 1-C, 1+C) A) + value_coef (V - R)^2
/// - entropy_coef H_t with q = exp(log pi(a|s) - log_prob_old).
LossGradients ppo_loss(const Trajectory& buffer,
                       std::span<const double> returns,
                       const ActorCritic& model, const AgentHyper& hyper);

/// One Adam step on the A2C loss of a finished episode.
LossReport a2c_update(const Trajectory& trajectory, ActorCritic& model,
                      const AgentHyper& hyper);

/// K epochs of full-buffer PPO updates. On return `actor_old` holds the
/// updated actor and `buffer` is empty. The reported loss is averaged over
/// epochs.
LossReport ppo_update(Trajectory& buffer, ActorCritic& model, Mlp& actor_old,
                      const AgentHyper& hyper);

struct EpisodeRecord {
    int episode = 0;
    double episode_return = 0.0;
    double final_fidelity = 0.0;
    int length = 0;
    std::vector<std::size_t> actions;
    std::optional<LossReport> loss;  // set when an update ran this episode
};

struct TrainResult {
    std::vector<EpisodeRecord> episodes;
    ActorCritic model;
};

using EpisodeCallback = std::function<void(const EpisodeRecord&)>;

/// Runs `episodes` training episodes. A2C updates after every episode; PPO
/// updates whenever `hyper.horizon` transitions have been collected.
TrainResult train(QuantumCircuitEnv& env, Algorithm algo,
                  const AgentHyper& hyper, int episodes, std::uint64_t seed,
                  const EpisodeCallback& on_episode = {});

/// Plays one episode taking the most probable action at every step.
std::vector<std::size_t> greedy_actions(QuantumCircuitEnv& env,
                                        const Mlp& actor);

}  // namespace qas
