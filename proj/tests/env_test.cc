#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "qas/env.h"

namespace qas {
namespace {

EnvConfig bell_config(NoiseSpec noise = {}) {
    EnvConfig c;
    c.noise = noise;
    return c;
}

std::size_t index_of(const QuantumCircuitEnv& env, const std::string& gate) {
    const auto idx = env.action_set().index_of(parse_gate_action(gate));
    EXPECT_TRUE(idx.has_value()) << gate;
    return idx.value_or(0);
}

void expect_obs(const Observation& got, const Observation& want, double tol = 1e-12) {
    ASSERT_EQ(got.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_NEAR(got[i], want[i], tol) << i;
}

// --- action set -------------------------------------------------------------

TEST(ActionSet, CountsMatchEnumeration) {
    for (int n = 2; n <= 4; ++n) {
        // Oracle: enumerate the distinct (gate, qubits) pairs directly.
        std::set<std::string> expected;
        for (int i = 0; i < n; ++i)
            for (const char* g : {"U", "X", "Y", "Z", "H"})
                expected.insert(std::string(g) + "(" + std::to_string(i) + ")");
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j)
                    expected.insert("CNOT(" + std::to_string(i) + "," + std::to_string(j) + ")");
        const auto set = ActionSet::build(n);
        std::set<std::string> got;
        for (const auto& a : set.actions()) got.insert(a.to_string());
        EXPECT_EQ(got, expected);
        EXPECT_EQ(set.size(), std::size_t(5 * n + n * (n - 1)));
    }
    EXPECT_EQ(ActionSet::build(2).size(), 12u);
    EXPECT_EQ(ActionSet::build(3).size(), 21u);
    EXPECT_EQ(ActionSet::build(4).size(), 32u);
}

TEST(ActionSet, Ordering) {
    const auto set = ActionSet::build(2);
    const char* expected[] = {"U(0)", "X(0)", "Y(0)", "Z(0)", "H(0)", "U(1)",
                              "X(1)", "Y(1)", "Z(1)", "H(1)", "CNOT(0,1)", "CNOT(1,0)"};
    for (std::size_t i = 0; i < 12; ++i) EXPECT_EQ(set[i].to_string(), expected[i]);
    EXPECT_DOUBLE_EQ(set[0].gate.angle, std::numbers::pi / 4);
}

TEST(ActionSet, Errors) {
    EXPECT_THROW(ActionSet::build(1), std::invalid_argument);
    EXPECT_THROW(ActionSet::build(0), std::invalid_argument);
}

TEST(ActionSet, ParseGateAction) {
    EXPECT_EQ(parse_gate_action("cx(1, 0)").to_string(), "CNOT(1,0)");
    EXPECT_EQ(parse_gate_action(" h(2) ").to_string(), "H(2)");
    EXPECT_THROW(parse_gate_action("T(0)"), std::invalid_argument);
    EXPECT_THROW(parse_gate_action("H0"), std::invalid_argument);
    EXPECT_THROW(parse_gate_action("H(a)"), std::invalid_argument);
}

TEST(ActionSet, StableAcrossReset) {
    QuantumCircuitEnv env(bell_config());
    std::vector<std::string> before;
    for (const auto& a : env.action_set().actions()) before.push_back(a.to_string());
    env.reset();
    env.step(0);
    env.reset();
    for (std::size_t i = 0; i < before.size(); ++i)
        EXPECT_EQ(env.action_set()[i].to_string(), before[i]);
}

// --- reset ------------------------------------------------------------------

TEST(Reset, NoiseFreeObservations) {
    QuantumCircuitEnv env2(bell_config());
    expect_obs(env2.reset(), {0, 0, 1, 0, 0, 1});
    EnvConfig c3;
    c3.n_qubits = 3;
    c3.target = ghz_state(3);
    QuantumCircuitEnv env3(c3);
    expect_obs(env3.reset(), {0, 0, 1, 0, 0, 1, 0, 0, 1});
    EXPECT_EQ(env3.observation_dim(), 9u);
}

TEST(Reset, ReadoutDamping) {
    QuantumCircuitEnv env(bell_config({0.0, 0.001}));
    expect_obs(env.reset(), {0, 0, 0.998, 0, 0, 0.998});
    EXPECT_TRUE(env.uses_density_matrix());
}

TEST(Reset, ClearsEpisode) {
    QuantumCircuitEnv env(bell_config());
    env.reset();
    env.step(index_of(env, "X(0)"));
    EXPECT_EQ(env.steps_used(), 1);
    expect_obs(env.reset(), {0, 0, 1, 0, 0, 1});
    EXPECT_EQ(env.steps_used(), 0);
    EXPECT_FALSE(env.done());
}

// --- step -------------------------------------------------------------------

TEST(Step, BellCircuit) {
    QuantumCircuitEnv env(bell_config());
    env.reset();
    const auto first = env.step(index_of(env, "H(1)"));
    EXPECT_DOUBLE_EQ(first.reward, -0.01);
    EXPECT_FALSE(first.done);
    // Oracle: |<Bell|q1=+>|^2 with amplitudes 1/sqrt2 at indices 0 and 2.
    const double overlap = (1 / std::numbers::sqrt2) * (1 / std::numbers::sqrt2);
    EXPECT_NEAR(first.fidelity, overlap * overlap, 1e-12);
    EXPECT_EQ(first.steps_used, 1);

    const auto second = env.step(index_of(env, "CNOT(1,0)"));
    EXPECT_NEAR(second.reward, 0.99, 1e-12);
    EXPECT_TRUE(second.done);
    EXPECT_NEAR(second.fidelity, 1.0, 1e-12);
    expect_obs(second.observation, {0, 0, 0, 0, 0, 0});
}

TEST(Step, HadamardOnControlGivesHalf) {
    // H on qubit 0 followed by nothing: |<Bell|+0>|^2 is also 1/4; a
    // fidelity of 1/2 is reached by the empty circuit.
    QuantumCircuitEnv env(bell_config());
    env.reset();
    EXPECT_NEAR(env.current_fidelity(), 0.5, 1e-12);
    EXPECT_NEAR(env.step(index_of(env, "H(0)")).fidelity, 0.25, 1e-12);
}

TEST(Step, TwentyZStepsTimeOut) {
    QuantumCircuitEnv env(bell_config());
    env.reset();
    double total = 0.0;
    StepResult r;
    for (int i = 0; i < 20; ++i) {
        r = env.step(index_of(env, "Z(0)"));
        total += r.reward;
        if (i < 19) {
            EXPECT_FALSE(r.done);
        }
    }
    EXPECT_TRUE(r.done);
    EXPECT_EQ(r.steps_used, 20);
    EXPECT_NEAR(total, -0.20, 1e-12);
    EXPECT_THROW(env.step(0), std::logic_error);
}

TEST(Step, Errors) {
    QuantumCircuitEnv env(bell_config());
    env.reset();
    EXPECT_THROW(env.step(12), std::out_of_range);
}

TEST(Step, NoiseFreeMixedPathMatchesPure) {
    EnvConfig forced = bell_config();
    forced.force_density_matrix = true;
    QuantumCircuitEnv pure(bell_config()), mixed(forced);
    EXPECT_FALSE(pure.uses_density_matrix());
    EXPECT_TRUE(mixed.uses_density_matrix());
    std::mt19937_64 rng(3);
    for (int episode = 0; episode < 50; ++episode) {
        expect_obs(pure.reset(), mixed.reset(), 1e-9);
        bool done = false;
        while (!done) {
            const std::size_t a = std::uniform_int_distribution<std::size_t>(0, 11)(rng);
            const auto rp = pure.step(a);
            const auto rm = mixed.step(a);
            expect_obs(rp.observation, rm.observation, 1e-9);
            EXPECT_NEAR(rp.fidelity, rm.fidelity, 1e-9);
            EXPECT_EQ(rp.done, rm.done);
            done = rp.done;
        }
    }
}

TEST(Step, NoisyObservationsAreDamped) {
    // Z(0) keeps |00>; after gate noise <Z> = 1 - p per affected qubit, then
    // readout damping multiplies by 1 - 2 p_meas.
    QuantumCircuitEnv env(bell_config({0.01, 0.001}));
    env.reset();
    const auto r = env.step(index_of(env, "Z(0)"));
    EXPECT_NEAR(r.observation[2], (1 - 0.01) * (1 - 2 * 0.001), 1e-12);
    EXPECT_NEAR(r.observation[5], 1 - 2 * 0.001, 1e-12);
}

TEST(Step, ShotSamplingModeStaysInRange) {
    EnvConfig c = bell_config({0.0, 0.01});
    c.shots = 100;
    c.shot_seed = 5;
    QuantumCircuitEnv env(c);
    const auto obs = env.reset();
    for (double v : obs) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(EnvConfig, Validation) {
    EnvConfig c;
    c.n_qubits = 3;  // target is 2 qubits
    EXPECT_THROW(QuantumCircuitEnv{c}, std::invalid_argument);
    c = EnvConfig{};
    c.fidelity_threshold = 1.5;
    EXPECT_THROW(QuantumCircuitEnv{c}, std::invalid_argument);
    c = EnvConfig{};
    c.max_steps = 0;
    EXPECT_THROW(QuantumCircuitEnv{c}, std::invalid_argument);
    c = EnvConfig{};
    c.noise.p_gate = -0.1;
    EXPECT_THROW(QuantumCircuitEnv{c}, std::invalid_argument);
}

// --- select_action / rollout ---------------------------------------------------

TEST(SelectAction, Degenerate) {
    std::mt19937_64 rng(1);
    const std::vector<double> p{1, 0, 0, 0};
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(select_action(p, rng), 0u);
}

TEST(SelectAction, Errors) {
    std::mt19937_64 rng(1);
    EXPECT_THROW(select_action(std::vector<double>{0.5, 0.4}, rng), std::invalid_argument);
    EXPECT_THROW(select_action(std::vector<double>{}, rng), std::invalid_argument);
    EXPECT_THROW(select_action(std::vector<double>{1.5, -0.5}, rng), std::invalid_argument);
}

TEST(Rollout, AlwaysFirstAction) {
    QuantumCircuitEnv env(bell_config());
    const Policy first = [](const Observation&) {
        std::vector<double> p(12, 0.0);
        p[0] = 1.0;
        return p;
    };
    const auto traj = episode_rollout(env, first, 1);
    ASSERT_EQ(traj.size(), 20u);
    for (std::size_t i = 0; i < traj.size(); ++i) {
        EXPECT_DOUBLE_EQ(traj[i].reward, -0.01);
        EXPECT_EQ(traj[i].done, i + 1 == traj.size());
        EXPECT_DOUBLE_EQ(traj[i].log_prob_old, 0.0);
    }
}

TEST(Rollout, ScriptedBellCircuit) {
    QuantumCircuitEnv env(bell_config());
    const std::size_t h1 = index_of(env, "H(1)");
    const std::size_t cx = index_of(env, "CNOT(1,0)");
    const Policy scripted = [&](const Observation& obs) {
        std::vector<double> p(12, 0.0);
        // Fresh state has <Z1> = 1; after H(1) it is 0.
        p[obs[5] > 0.5 ? h1 : cx] = 1.0;
        return p;
    };
    const auto traj = episode_rollout(env, scripted, 1);
    ASSERT_EQ(traj.size(), 2u);
    EXPECT_NEAR(traj.back().reward, 0.99, 1e-12);
    EXPECT_TRUE(traj.back().done);
    EXPECT_EQ(traj[0].action, h1);
}

TEST(Rollout, DeterministicGivenSeed) {
    QuantumCircuitEnv env(bell_config());
    const Policy uniform = [](const Observation&) { return std::vector<double>(12, 1.0 / 12); };
    const auto a = episode_rollout(env, uniform, 99);
    const auto b = episode_rollout(env, uniform, 99);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].action, b[i].action);
        EXPECT_EQ(a[i].state, b[i].state);
        EXPECT_EQ(a[i].reward, b[i].reward);
        EXPECT_EQ(a[i].log_prob_old, b[i].log_prob_old);
    }
}

TEST(Rollout, RewardStructureInvariants) {
    EnvConfig c = bell_config();
    QuantumCircuitEnv env(c);
    const Policy uniform = [](const Observation&) { return std::vector<double>(12, 1.0 / 12); };
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto traj = episode_rollout(env, uniform, seed);
        ASSERT_LE(traj.size(), 20u);
        for (std::size_t i = 0; i + 1 < traj.size(); ++i) {
            EXPECT_DOUBLE_EQ(traj[i].reward, -0.01);
            EXPECT_FALSE(traj[i].done);
            EXPECT_LE(traj[i].log_prob_old, 0.0);
        }
        const auto& last = traj.back();
        EXPECT_TRUE(last.done);
        if (last.fidelity >= c.fidelity_threshold) {
            EXPECT_NEAR(last.reward, last.fidelity - 0.01, 1e-15);
        } else {
            EXPECT_EQ(traj.size(), 20u);
            EXPECT_DOUBLE_EQ(last.reward, -0.01);
        }
    }
}

TEST(Rollout, RejectsWrongPolicyWidth) {
    QuantumCircuitEnv env(bell_config());
    const Policy bad = [](const Observation&) { return std::vector<double>(3, 1.0 / 3); };
    EXPECT_THROW(episode_rollout(env, bad, 0), std::invalid_argument);
}

}  // namespace
}  // namespace qas
