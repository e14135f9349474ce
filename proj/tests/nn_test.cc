#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "checks.h"
#include "qas/nn.h"

namespace qas {
namespace {

const std::vector<double> kObs{0.3, -0.2, 0.9, 0.0, 0.0, 1.0};

TEST(MlpShape, StandardMatchesNetworkTable) {
    const auto s = MlpShape::standard(6, 12);
    EXPECT_EQ(s.layer_count(), 3u);
    EXPECT_EQ(s.fan_in(0), 6);
    EXPECT_EQ(s.fan_out(0), 64);
    EXPECT_EQ(s.fan_in(1), 64);
    EXPECT_EQ(s.fan_out(1), 64);
    EXPECT_EQ(s.fan_in(2), 64);
    EXPECT_EQ(s.fan_out(2), 12);
    EXPECT_EQ(s.parameter_count(), std::size_t(6 * 64 + 64 + 64 * 64 + 64 + 64 * 12 + 12));
}

TEST(PolicyForward, ZeroNetworkIsUniform) {
    const Mlp actor(MlpShape::standard(6, 12));
    const auto p = policy_forward(actor, kObs);
    ASSERT_EQ(p.size(), 12u);
    for (double x : p) EXPECT_NEAR(x, 1.0 / 12, 1e-15);
}

TEST(PolicyForward, EqualHeadBiasIsUniform) {
    Mlp actor(MlpShape::standard(6, 12));
    for (double& b : actor.biases(2)) b = 1.0;
    for (double x : policy_forward(actor, kObs)) EXPECT_NEAR(x, 1.0 / 12, 1e-15);
}

TEST(PolicyForward, NormalizedPositiveAndDeterministic) {
    std::mt19937_64 rng(1);
    const auto actor = Mlp::initialized(MlpShape::standard(6, 12), rng);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> obs(6);
        for (double& x : obs) x = u(rng);
        const auto p = policy_forward(actor, obs);
        EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
        for (double x : p) EXPECT_GT(x, 0.0);
        EXPECT_EQ(p, policy_forward(actor, obs));
    }
}

TEST(PolicyForward, Errors) {
    const Mlp actor(MlpShape::standard(6, 12));
    EXPECT_THROW(policy_forward(actor, std::vector<double>(5, 0.0)), std::invalid_argument);
    std::vector<double> bad = kObs;
    bad[1] = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(policy_forward(actor, bad), std::invalid_argument);
    bad[1] = std::numeric_limits<double>::infinity();
    EXPECT_THROW(policy_forward(actor, bad), std::invalid_argument);
}

TEST(ValueForward, ZeroBiasAndDeterminism) {
    Mlp critic(MlpShape::standard(6, 1));
    EXPECT_EQ(value_forward(critic, kObs), 0.0);
    critic.biases(2)[0] = -0.75;
    EXPECT_EQ(value_forward(critic, kObs), -0.75);
    std::mt19937_64 rng(2);
    const auto random = Mlp::initialized(MlpShape::standard(6, 1), rng);
    const double v = value_forward(random, kObs);
    EXPECT_TRUE(std::isfinite(v));
    for (int i = 0; i < 10; ++i) EXPECT_EQ(value_forward(random, kObs), v);
    EXPECT_THROW(value_forward(critic, std::vector<double>(7, 0.0)), std::invalid_argument);
    EXPECT_THROW(value_forward(Mlp(MlpShape::standard(6, 2)), kObs), std::invalid_argument);
}

TEST(Init, UniformWithinFanInBound) {
    std::mt19937_64 rng(3);
    const auto net = Mlp::initialized(MlpShape::standard(6, 12), rng);
    for (std::size_t l = 0; l < 3; ++l) {
        const double bound = 1.0 / std::sqrt(double(net.shape().fan_in(l)));
        double max_abs = 0.0;
        for (double w : net.weights(l)) max_abs = std::max(max_abs, std::abs(w));
        for (double b : net.biases(l)) max_abs = std::max(max_abs, std::abs(b));
        EXPECT_LE(max_abs, bound);
        EXPECT_GT(max_abs, 0.5 * bound);
    }
    std::mt19937_64 again(3);
    const auto same = Mlp::initialized(MlpShape::standard(6, 12), again);
    EXPECT_TRUE(std::equal(net.parameters().begin(), net.parameters().end(),
                           same.parameters().begin()));
}

// --- backprop -----------------------------------------------------------------

TEST(Backprop, ZeroLossGradientIsZero) {
    std::mt19937_64 rng(4);
    const auto net = Mlp::initialized(MlpShape::standard(6, 12), rng);
    const auto tape = net.forward(kObs);
    std::vector<double> grad(net.shape().parameter_count(), 0.0);
    net.backward(tape, std::vector<double>(12, 0.0), grad);
    for (double g : grad) EXPECT_EQ(g, 0.0);
}

TEST(Backprop, SingleAffineLayer) {
    // loss = output, so dloss/dw_j = x_j and dloss/db = 1.
    std::mt19937_64 rng(5);
    const auto net = Mlp::initialized(MlpShape{3, {}, 1}, rng);
    const std::vector<double> x{0.5, -1.5, 2.0};
    const auto tape = net.forward(x);
    std::vector<double> grad(4, 0.0);
    net.backward(tape, std::vector<double>{1.0}, grad);
    EXPECT_DOUBLE_EQ(grad[0], 0.5);
    EXPECT_DOUBLE_EQ(grad[1], -1.5);
    EXPECT_DOUBLE_EQ(grad[2], 2.0);
    EXPECT_DOUBLE_EQ(grad[3], 1.0);
}

TEST(Backprop, AccumulatesIntoBuffer) {
    std::mt19937_64 rng(6);
    const auto net = Mlp::initialized(MlpShape{2, {3}, 2}, rng);
    const auto tape = net.forward(std::vector<double>{0.1, 0.2});
    std::vector<double> once(net.shape().parameter_count(), 0.0), twice = once;
    const std::vector<double> d{0.3, -0.7};
    net.backward(tape, d, once);
    net.backward(tape, d, twice);
    net.backward(tape, d, twice);
    for (std::size_t i = 0; i < once.size(); ++i) EXPECT_NEAR(twice[i], 2 * once[i], 1e-15);
}

TEST(Backprop, FiniteDifferenceAgreement) {
    const auto r = checks::gradient_check(100);
    EXPECT_EQ(r.trials, 100);
    EXPECT_EQ(r.failed_trials, 0) << "worst relative error " << r.worst_relative;
}

TEST(Backprop, StandardShapeFiniteDifference) {
    // One full-size actor with a log-prob + entropy loss.
    std::mt19937_64 rng(7);
    const auto net = Mlp::initialized(MlpShape::standard(6, 12), rng);
    checks::RandomLoss loss{std::vector<double>(12, 0.0), std::vector<double>(12, 0.0), 4, -1.3, 0.01};
    Mlp probe = net;
    const auto tape = probe.forward(kObs);
    // Drop the quadratic part so the loss mirrors a policy objective.
    auto value = [&](const std::vector<double>& out) {
        double sq = 0.0;
        for (double o : out) sq += 0.5 * o * o;
        return loss(out) - sq;
    };
    auto d_out = loss.gradient(tape.output);
    for (std::size_t k = 0; k < 12; ++k) d_out[k] -= tape.output[k];
    std::vector<double> grad(probe.shape().parameter_count(), 0.0);
    probe.backward(tape, d_out, grad);
    auto params = probe.parameters();
    for (std::size_t i = 0; i < params.size(); i += 7) {
        const double keep = params[i];
        params[i] = keep + 1e-5;
        const double up = value(probe.forward(kObs).output);
        params[i] = keep - 1e-5;
        const double down = value(probe.forward(kObs).output);
        params[i] = keep;
        const double numeric = (up - down) / 2e-5;
        EXPECT_TRUE(checks::gradient_close(grad[i], numeric, 1e-4, 1e-7))
            << i << ": " << grad[i] << " vs " << numeric;
    }
}

TEST(Backprop, Errors) {
    const Mlp a(MlpShape{2, {3}, 2});
    const Mlp b(MlpShape{2, {4}, 2});
    const auto tape = a.forward(std::vector<double>{0, 0});
    std::vector<double> grad(b.shape().parameter_count(), 0.0);
    EXPECT_THROW(b.backward(tape, std::vector<double>{1, 1}, grad), std::invalid_argument);
    std::vector<double> ga(a.shape().parameter_count(), 0.0);
    EXPECT_THROW(a.backward(tape, std::vector<double>{1}, ga), std::invalid_argument);
    std::vector<double> short_grad(3, 0.0);
    EXPECT_THROW(a.backward(tape, std::vector<double>{1, 1}, short_grad), std::invalid_argument);
}

// --- softmax ------------------------------------------------------------------

TEST(Softmax, ShiftInvariance) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<double> z(12), shifted(12);
        const double c = 100 * u(rng);
        for (std::size_t k = 0; k < 12; ++k) shifted[k] = (z[k] = u(rng)) + c;
        const auto p = softmax(z), q = softmax(shifted);
        for (std::size_t k = 0; k < 12; ++k) EXPECT_NEAR(p[k], q[k], 1e-12);
    }
}

TEST(Softmax, StableForLargeLogits) {
    const std::vector<double> z{1e3, -1e3, 999.0, 0.0};
    const auto p = softmax(z);
    const auto lp = log_softmax(z);
    for (std::size_t k = 0; k < z.size(); ++k) {
        EXPECT_TRUE(std::isfinite(p[k]));
        EXPECT_TRUE(std::isfinite(lp[k]));
    }
    EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(-1.0)), 1e-12);
    EXPECT_NEAR(lp[1], -2000.0 - std::log1p(std::exp(-1.0)), 1e-9);
    EXPECT_THROW(softmax(std::vector<double>{}), std::invalid_argument);
}

// --- Adam ---------------------------------------------------------------------

TEST(Adam, ZeroGradientLeavesParameters) {
    std::vector<double> theta{0.5, -1.0, 2.0};
    AdamState s;
    adam_step(theta, std::vector<double>(3, 0.0), s, 0.1);
    EXPECT_EQ(theta, (std::vector<double>{0.5, -1.0, 2.0}));
    EXPECT_EQ(s.t, 1);
}

TEST(Adam, HandEvaluatedSteps) {
    const auto r = checks::adam_hand_steps();
    EXPECT_LE(r.one_step_error, 1e-9);
    EXPECT_LE(r.two_step_error, 1e-9);
    EXPECT_TRUE(r.counter_ok);
}

TEST(Adam, ZeroBetasGiveScaledGradientStep) {
    std::vector<double> theta{1.0, -2.0, 0.0};
    const std::vector<double> g{0.5, -3.0, 0.25};
    AdamState s;
    s.beta1 = 0.0;
    s.beta2 = 0.0;
    s.epsilon = 10.0;
    adam_step(theta, g, s, 0.2);
    // m_hat = g, v_hat = g^2, step = lr * g / (|g| + eps).
    const std::vector<double> start{1.0, -2.0, 0.0};
    for (std::size_t i = 0; i < 3; ++i) {
        EXPECT_NEAR(theta[i], start[i] - 0.2 * g[i] / (std::abs(g[i]) + 10.0), 1e-15);
    }
}

TEST(Adam, MomentsStayValid) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> n;
    std::vector<double> theta(5, 0.0);
    AdamState s;
    for (int t = 1; t <= 50; ++t) {
        std::vector<double> g(5);
        for (double& x : g) x = n(rng);
        adam_step(theta, g, s, 0.01);
        EXPECT_EQ(s.t, t);
        for (double v : s.v) EXPECT_GE(v, 0.0);
    }
}

TEST(Adam, Errors) {
    std::vector<double> theta{0.0, 0.0};
    AdamState s;
    EXPECT_THROW(adam_step(theta, std::vector<double>{1.0}, s, 0.1), std::invalid_argument);
    EXPECT_THROW(adam_step(theta, std::vector<double>{1.0, 1.0}, s, 0.0), std::invalid_argument);
    EXPECT_THROW(adam_step(theta, std::vector<double>{1.0, std::nan("")}, s, 0.1),
                 std::invalid_argument);
    s.beta1 = 1.0;
    EXPECT_THROW(adam_step(theta, std::vector<double>{1.0, 1.0}, s, 0.1), std::invalid_argument);
}

// --- checkpoints ------------------------------------------------------------------

TEST(Checkpoint, RoundTripIsExact) {
    std::mt19937_64 rng(10);
    const auto net = Mlp::initialized(MlpShape::standard(9, 21), rng);
    std::stringstream buf;
    save_checkpoint(buf, net);
    const auto back = load_checkpoint(buf);
    EXPECT_EQ(back.shape(), net.shape());
    EXPECT_TRUE(std::equal(net.parameters().begin(), net.parameters().end(),
                           back.parameters().begin(), back.parameters().end()));
    EXPECT_EQ(policy_forward(back, std::vector<double>(9, 0.1)),
              policy_forward(net, std::vector<double>(9, 0.1)));
}

TEST(Checkpoint, RejectsCorruptInput) {
    std::stringstream wrong("not-a-checkpoint 1 2");
    EXPECT_THROW(load_checkpoint(wrong), std::runtime_error);
    std::stringstream truncated("qas-mlp 3 2 2 2\n0.5\n");
    EXPECT_THROW(load_checkpoint(truncated), std::runtime_error);
    truncated.str("qas-mlp 3 2 0 2\n");
    EXPECT_THROW(load_checkpoint(truncated), std::runtime_error);
    EXPECT_THROW(load_checkpoint(std::string("/nonexistent/dir/ckpt.txt")), std::runtime_error);
}

}  // namespace
}  // namespace qas
