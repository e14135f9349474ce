#include "qas/agents.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

namespace qas {

std::string to_string(Algorithm algo) {
    return algo == Algorithm::A2C ? "a2c" : "ppo";
}

Algorithm parse_algorithm(const std::string& name) {
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (lower == "a2c") return Algorithm::A2C;
    if (lower == "ppo") return Algorithm::PPO;
    throw std::invalid_argument("unknown algorithm \"" + name +
                                "\" (expected a2c or ppo)");
}

AgentHyper AgentHyper::a2c_defaults() {
    AgentHyper h;
    h.gamma = 0.99;
    h.learning_rate = 1e-4;
    h.value_coef = 1.0;
    h.entropy_coef = 0.001;
    return h;
}

AgentHyper AgentHyper::ppo_defaults() {
    AgentHyper h;
    h.gamma = 0.99;
    h.learning_rate = 0.002;
    h.clip = 0.2;
    h.epochs = 4;
    h.horizon = 1000;
    h.value_coef = 0.5;
    h.entropy_coef = 0.01;
    return h;
}

AgentHyper AgentHyper::defaults_for(Algorithm algo) {
    return algo == Algorithm::A2C ? a2c_defaults() : ppo_defaults();
}

void AgentHyper::validate(Algorithm algo) const {
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in (0, 1]");
    }
    if (!(learning_rate > 0.0 && std::isfinite(learning_rate))) {
        throw std::invalid_argument("learning rate must be positive");
    }
    if (!(value_coef >= 0.0) || !(entropy_coef >= 0.0)) {
        throw std::invalid_argument("loss coefficients must be non-negative");
    }
    if (algo == Algorithm::PPO) {
        if (!(clip > 0.0 && clip < 1.0)) {
            throw std::invalid_argument("clip must lie in (0, 1)");
        }
        if (epochs < 1) throw std::invalid_argument("epochs must be >= 1");
        if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
    }
}

ActorCritic ActorCritic::initialized(int obs_dim, int action_count,
                                     std::mt19937_64& rng) {
    ActorCritic model;
    model.actor = Mlp::initialized(MlpShape::standard(obs_dim, action_count), rng);
    model.critic = Mlp::initialized(MlpShape::standard(obs_dim, 1), rng);
    return model;
}

std::vector<double> discounted_returns(std::span<const double> rewards,
                                       double gamma,
                                       const std::vector<bool>& terminal) {
    if (rewards.empty()) throw std::invalid_argument("no rewards");
    if (terminal.size() != rewards.size()) {
        throw std::invalid_argument("rewards and terminal flags differ in length");
    }
    if (!(gamma > 0.0 && gamma <= 1.0)) {
        throw std::invalid_argument("gamma must lie in (0, 1]");
    }
    std::vector<double> out(rewards.size());
    double running = 0.0;
    for (std::size_t t = rewards.size(); t-- > 0;) {
        if (terminal[t]) running = 0.0;
        running = rewards[t] + gamma * running;
        out[t] = running;
    }
    return out;
}

std::vector<double> discounted_returns(const Trajectory& trajectory,
                                       double gamma) {
    std::vector<double> rewards;
    std::vector<bool> terminal;
    rewards.reserve(trajectory.size());
    for (const auto& tr : trajectory) {
        rewards.push_back(tr.reward);
        terminal.push_back(tr.done);
    }
    return discounted_returns(rewards, gamma, terminal);
}

namespace {

struct StepEval {
    GradTape actor_tape;
    GradTape critic_tape;
    std::vector<double> probs;
    std::vector<double> log_probs;
    double value = 0.0;
    double entropy = 0.0;
};

StepEval evaluate(const ActorCritic& model, const Observation& obs) {
    StepEval e;
    e.actor_tape = model.actor.forward(obs);
    e.critic_tape = model.critic.forward(obs);
    e.log_probs = log_softmax(e.actor_tape.output);
    e.probs.resize(e.log_probs.size());
    for (std::size_t j = 0; j < e.probs.size(); ++j) {
        e.probs[j] = std::exp(e.log_probs[j]);
        e.entropy -= e.probs[j] * e.log_probs[j];
    }
    e.value = e.critic_tape.output[0];
    return e;
}

// d/dz of (g_logp * log pi_a - entropy_weight * H) for a softmax head.
std::vector<double> logit_gradient(const StepEval& e, std::size_t action,
                                   double g_logp, double entropy_weight) {
    std::vector<double> d(e.probs.size());
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double onehot = k == action ? 1.0 : 0.0;
        d[k] = g_logp * (onehot - e.probs[k]) +
               entropy_weight * e.probs[k] * (e.log_probs[k] + e.entropy);
    }
    return d;
}

void check_trajectory(const Trajectory& tr, const ActorCritic& model) {
    if (tr.empty()) throw std::invalid_argument("empty trajectory");
    const std::size_t actions = model.actor.shape().outputs;
    for (const auto& t : tr) {
        if (t.action >= actions) {
            throw std::invalid_argument("transition action out of range");
        }
    }
}

}  // namespace

LossGradients a2c_loss(const Trajectory& trajectory, const ActorCritic& model,
                       const AgentHyper& hyper) {
    check_trajectory(trajectory, model);
    const auto returns = discounted_returns(trajectory, hyper.gamma);
    const double inv_n = 1.0 / double(trajectory.size());

    LossGradients out;
    out.actor_grad.assign(model.actor.parameters().size(), 0.0);
    out.critic_grad.assign(model.critic.parameters().size(), 0.0);
    for (std::size_t t = 0; t < trajectory.size(); ++t) {
        const auto& tr = trajectory[t];
        const StepEval e = evaluate(model, tr.state);
        const double advantage = returns[t] - e.value;
        const double err = e.value - returns[t];

        out.loss.policy += -e.log_probs[tr.action] * advantage * inv_n;
        out.loss.value += err * err * inv_n;
        out.loss.entropy += e.entropy;

        // Policy term is averaged, the entropy term is summed.
        const auto d_logits =
            logit_gradient(e, tr.action, -advantage * inv_n, hyper.entropy_coef);
        model.actor.backward(e.actor_tape, d_logits, out.actor_grad);
        const double d_value = hyper.value_coef * 2.0 * err * inv_n;
        model.critic.backward(e.critic_tape, std::span(&d_value, 1),
                              out.critic_grad);
    }
    out.loss.total = hyper.value_coef * out.loss.value + out.loss.policy -
                     hyper.entropy_coef * out.loss.entropy;
    return out;
}

LossGradients ppo_loss(const Trajectory& buffer,
                       std::span<const double> returns,
                       const ActorCritic& model, const AgentHyper& hyper) {
    check_trajectory(buffer, model);
    if (returns.size() != buffer.size()) {
        throw std::invalid_argument("returns and buffer differ in length");
    }
    const double inv_n = 1.0 / double(buffer.size());
    const double lo = 1.0 - hyper.clip;
    const double hi = 1.0 + hyper.clip;

    LossGradients out;
    out.actor_grad.assign(model.actor.parameters().size(), 0.0);
    out.critic_grad.assign(model.critic.parameters().size(), 0.0);
    for (std::size_t t = 0; t < buffer.size(); ++t) {
        const auto& tr = buffer[t];
        const StepEval e = evaluate(model, tr.state);
        const double advantage = returns[t] - e.value;
        const double ratio = std::exp(e.log_probs[tr.action] - tr.log_prob_old);
        const double surr1 = ratio * advantage;
        const double surr2 = std::clamp(ratio, lo, hi) * advantage;
        const double err = e.value - returns[t];

        out.loss.policy += -std::min(surr1, surr2) * inv_n;
        out.loss.value += err * err * inv_n;
        out.loss.entropy += e.entropy * inv_n;

        // d(-min)/d(log pi_a): -q A while the unclipped branch is active,
        // zero once the clipped constant wins.
        const double g_logp = surr1 <= surr2 ? -surr1 * inv_n : 0.0;
        const auto d_logits =
            logit_gradient(e, tr.action, g_logp, hyper.entropy_coef * inv_n);
        model.actor.backward(e.actor_tape, d_logits, out.actor_grad);
        const double d_value = hyper.value_coef * 2.0 * err * inv_n;
        model.critic.backward(e.critic_tape, std::span(&d_value, 1),
                              out.critic_grad);
    }
    out.loss.total = out.loss.policy + hyper.value_coef * out.loss.value -
                     hyper.entropy_coef * out.loss.entropy;
    return out;
}

namespace {

void apply_gradients(ActorCritic& model, const LossGradients& g,
                     double learning_rate) {
    adam_step(model.actor.parameters(), g.actor_grad, model.actor_opt,
              learning_rate);
    adam_step(model.critic.parameters(), g.critic_grad, model.critic_opt,
              learning_rate);
}

}  // namespace

LossReport a2c_update(const Trajectory& trajectory, ActorCritic& model,
                      const AgentHyper& hyper) {
    hyper.validate(Algorithm::A2C);
    LossGradients g = a2c_loss(trajectory, model, hyper);
    apply_gradients(model, g, hyper.learning_rate);
    return g.loss;
}

LossReport ppo_update(Trajectory& buffer, ActorCritic& model, Mlp& actor_old,
                      const AgentHyper& hyper) {
    hyper.validate(Algorithm::PPO);
    if (buffer.size() < std::size_t(hyper.horizon)) {
        throw std::invalid_argument("PPO buffer holds " +
                                    std::to_string(buffer.size()) +
                                    " transitions, horizon is " +
                                    std::to_string(hyper.horizon));
    }
    if (!(actor_old.shape() == model.actor.shape())) {
        throw std::invalid_argument("old and current actor shapes differ");
    }
    const auto returns = discounted_returns(buffer, hyper.gamma);

    LossReport mean;
    for (int k = 0; k < hyper.epochs; ++k) {
        LossGradients g = ppo_loss(buffer, returns, model, hyper);
        apply_gradients(model, g, hyper.learning_rate);
        mean.total += g.loss.total / hyper.epochs;
        mean.policy += g.loss.policy / hyper.epochs;
        mean.value += g.loss.value / hyper.epochs;
        mean.entropy += g.loss.entropy / hyper.epochs;
    }
    actor_old = model.actor;
    buffer.clear();
    return mean;
}

TrainResult train(QuantumCircuitEnv& env, Algorithm algo,
                  const AgentHyper& hyper, int episodes, std::uint64_t seed,
                  const EpisodeCallback& on_episode) {
    if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
    hyper.validate(algo);

    std::mt19937_64 rng(seed);
    TrainResult result;
    result.model = ActorCritic::initialized(int(env.observation_dim()),
                                            int(env.action_count()), rng);
    ActorCritic& model = result.model;
    Mlp actor_old = model.actor;
    Trajectory buffer;
    result.episodes.reserve(episodes);

    for (int ep = 0; ep < episodes; ++ep) {
        EpisodeRecord rec;
        rec.episode = ep;
        Trajectory episode;
        Observation obs = env.reset();
        bool done = false;
        while (!done) {
            const Mlp& behaviour = algo == Algorithm::PPO ? actor_old : model.actor;
            const auto log_probs = log_softmax(behaviour.forward(obs).output);
            std::vector<double> probs(log_probs.size());
            for (std::size_t j = 0; j < probs.size(); ++j) {
                probs[j] = std::exp(log_probs[j]);
            }
            const std::size_t action = select_action(probs, rng);
            StepResult r = env.step(action);
            done = r.done;

            Transition tr{std::move(obs), action, log_probs[action], r.reward,
                          r.done, r.fidelity};
            obs = std::move(r.observation);
            rec.episode_return += tr.reward;
            rec.final_fidelity = tr.fidelity;
            rec.actions.push_back(action);

            if (algo == Algorithm::PPO) {
                buffer.push_back(std::move(tr));
                if (buffer.size() == std::size_t(hyper.horizon)) {
                    rec.loss = ppo_update(buffer, model, actor_old, hyper);
                }
            } else {
                episode.push_back(std::move(tr));
            }
        }
        rec.length = int(rec.actions.size());
        if (algo == Algorithm::A2C) rec.loss = a2c_update(episode, model, hyper);
        if (on_episode) on_episode(rec);
        result.episodes.push_back(std::move(rec));
    }
    return result;
}

std::vector<std::size_t> greedy_actions(QuantumCircuitEnv& env,
                                        const Mlp& actor) {
    std::vector<std::size_t> actions;
    Observation obs = env.reset();
    bool done = false;
    while (!done) {
        const auto logits = actor.forward(obs).output;
        const std::size_t a = std::size_t(
            std::max_element(logits.begin(), logits.end()) - logits.begin());
        StepResult r = env.step(a);
        actions.push_back(a);
        obs = std::move(r.observation);
        done = r.done;
    }
    return actions;
}

}  // namespace qas
