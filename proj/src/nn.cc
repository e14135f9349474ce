#include "qas/nn.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace qas {

int MlpShape::fan_in(std::size_t layer) const {
    return layer == 0 ? inputs : hidden.at(layer - 1);
}

int MlpShape::fan_out(std::size_t layer) const {
    return layer == hidden.size() ? outputs : hidden.at(layer);
}

std::size_t MlpShape::parameter_count() const {
    std::size_t total = 0;
    for (std::size_t k = 0; k < layer_count(); ++k) {
        total += std::size_t(fan_out(k)) * (fan_in(k) + 1);
    }
    return total;
}

Mlp::Mlp(MlpShape shape) : shape_(std::move(shape)) {
    if (shape_.inputs < 1 || shape_.outputs < 1) {
        throw std::invalid_argument("MLP needs positive input and output width");
    }
    for (int h : shape_.hidden) {
        if (h < 1) throw std::invalid_argument("hidden width must be positive");
    }
    params_.assign(shape_.parameter_count(), 0.0);
}

Mlp Mlp::initialized(MlpShape shape, std::mt19937_64& rng) {
    Mlp net(std::move(shape));
    for (std::size_t k = 0; k < net.shape_.layer_count(); ++k) {
        const double bound = 1.0 / std::sqrt(double(net.shape_.fan_in(k)));
        std::uniform_real_distribution<double> draw(-bound, bound);
        for (double& w : net.weights(k)) w = draw(rng);
        for (double& b : net.biases(k)) b = draw(rng);
    }
    return net;
}

std::size_t Mlp::layer_offset(std::size_t layer) const {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < layer; ++k) {
        offset += std::size_t(shape_.fan_out(k)) * (shape_.fan_in(k) + 1);
    }
    return offset;
}

std::span<double> Mlp::weights(std::size_t layer) {
    return std::span<double>(params_).subspan(
        layer_offset(layer),
        std::size_t(shape_.fan_out(layer)) * shape_.fan_in(layer));
}

std::span<double> Mlp::biases(std::size_t layer) {
    return std::span<double>(params_).subspan(
        layer_offset(layer) +
            std::size_t(shape_.fan_out(layer)) * shape_.fan_in(layer),
        shape_.fan_out(layer));
}

std::span<const double> Mlp::weights(std::size_t layer) const {
    return const_cast<Mlp*>(this)->weights(layer);
}

std::span<const double> Mlp::biases(std::size_t layer) const {
    return const_cast<Mlp*>(this)->biases(layer);
}

GradTape Mlp::forward(std::span<const double> input) const {
    if (static_cast<int>(input.size()) != shape_.inputs) {
        throw std::invalid_argument("MLP expects " + std::to_string(shape_.inputs) +
                                    " inputs, got " + std::to_string(input.size()));
    }
    for (double x : input) {
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite MLP input");
    }
    GradTape tape;
    tape.shape = shape_;
    tape.activations.emplace_back(input.begin(), input.end());
    const std::size_t last = shape_.layer_count() - 1;
    for (std::size_t k = 0; k <= last; ++k) {
        const auto& x = tape.activations.back();
        const auto w = weights(k);
        const auto b = biases(k);
        const int n_in = shape_.fan_in(k);
        std::vector<double> y(b.begin(), b.end());
        for (std::size_t o = 0; o < y.size(); ++o) {
            const double* row = w.data() + o * n_in;
            double acc = y[o];
            for (int i = 0; i < n_in; ++i) acc += row[i] * x[i];
            y[o] = k == last ? acc : std::tanh(acc);
        }
        if (k == last) {
            tape.output = std::move(y);
        } else {
            tape.activations.push_back(std::move(y));
        }
    }
    return tape;
}

void Mlp::backward(const GradTape& tape, std::span<const double> d_output,
                   std::span<double> grad) const {
    if (!(tape.shape == shape_) ||
        tape.activations.size() != shape_.layer_count() ||
        tape.output.size() != std::size_t(shape_.outputs)) {
        throw std::invalid_argument("tape was not produced by this network");
    }
    if (d_output.size() != std::size_t(shape_.outputs)) {
        throw std::invalid_argument("loss gradient has wrong width");
    }
    if (grad.size() != params_.size()) {
        throw std::invalid_argument("gradient buffer has wrong size");
    }

    std::vector<double> delta(d_output.begin(), d_output.end());
    for (std::size_t k = shape_.layer_count(); k-- > 0;) {
        const auto& x = tape.activations[k];
        const int n_in = shape_.fan_in(k);
        const int n_out = shape_.fan_out(k);
        const std::size_t offset = layer_offset(k);
        double* gw = grad.data() + offset;
        double* gb = gw + std::size_t(n_out) * n_in;
        const double* w = params_.data() + offset;

        std::vector<double> d_input(k > 0 ? n_in : 0, 0.0);
        for (int o = 0; o < n_out; ++o) {
            const double d = delta[o];
            gb[o] += d;
            if (d == 0.0) continue;
            double* grow = gw + std::size_t(o) * n_in;
            for (int i = 0; i < n_in; ++i) grow[i] += d * x[i];
            if (k > 0) {
                const double* wrow = w + std::size_t(o) * n_in;
                for (int i = 0; i < n_in; ++i) d_input[i] += d * wrow[i];
            }
        }
        if (k > 0) {
            // x is tanh(z); dtanh/dz = 1 - tanh^2.
            for (int i = 0; i < n_in; ++i) d_input[i] *= 1.0 - x[i] * x[i];
            delta = std::move(d_input);
        }
    }
}

std::vector<double> softmax(std::span<const double> logits) {
    std::vector<double> out = log_softmax(logits);
    for (double& v : out) v = std::exp(v);
    return out;
}

std::vector<double> log_softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
    const double top = *std::max_element(logits.begin(), logits.end());
    double sum = 0.0;
    for (double z : logits) sum += std::exp(z - top);
    const double log_norm = top + std::log(sum);
    std::vector<double> out(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - log_norm;
    return out;
}

std::vector<double> policy_forward(const Mlp& actor,
                                   std::span<const double> obs) {
    return softmax(actor.forward(obs).output);
}

double value_forward(const Mlp& critic, std::span<const double> obs) {
    if (critic.shape().outputs != 1) {
        throw std::invalid_argument("critic must have a single output");
    }
    return critic.forward(obs).output[0];
}

void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double learning_rate) {
    if (grads.size() != params.size()) {
        throw std::invalid_argument("Adam: gradient/parameter size mismatch");
    }
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("Adam: learning rate must be positive");
    }
    for (double g : grads) {
        if (!std::isfinite(g)) throw std::invalid_argument("Adam: non-finite gradient");
    }
    if (!(state.beta1 >= 0.0 && state.beta1 < 1.0 && state.beta2 >= 0.0 &&
          state.beta2 < 1.0)) {
        throw std::invalid_argument("Adam: betas must lie in [0, 1)");
    }
    if (state.m.empty() && state.v.empty() && state.t == 0) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size() || state.v.size() != params.size()) {
        throw std::invalid_argument("Adam: moment/parameter size mismatch");
    }

    ++state.t;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double bias1 = 1.0 - std::pow(b1, double(state.t));
    const double bias2 = 1.0 - std::pow(b2, double(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double g = grads[i];
        state.m[i] = b1 * state.m[i] + (1.0 - b1) * g;
        state.v[i] = b2 * state.v[i] + (1.0 - b2) * g * g;
        const double m_hat = state.m[i] / bias1;
        const double v_hat = state.v[i] / bias2;
        params[i] -= learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
}

void save_checkpoint(std::ostream& out, const Mlp& net) {
    const MlpShape& s = net.shape();
    out << "qas-mlp " << s.layer_count() + 1 << ' ' << s.inputs;
    for (int h : s.hidden) out << ' ' << h;
    out << ' ' << s.outputs << '\n';
    out << std::setprecision(std::numeric_limits<double>::max_digits10);
    for (double p : net.parameters()) out << p << '\n';
}

Mlp load_checkpoint(std::istream& in) {
    std::string magic;
    std::size_t widths = 0;
    if (!(in >> magic >> widths) || magic != "qas-mlp" || widths < 2) {
        throw std::runtime_error("not a qas-mlp checkpoint");
    }
    std::vector<int> w(widths);
    for (auto& x : w) {
        if (!(in >> x)) throw std::runtime_error("truncated checkpoint header");
    }
    MlpShape shape{w.front(), std::vector<int>(w.begin() + 1, w.end() - 1),
                   w.back()};
    Mlp net;
    try {
        net = Mlp(shape);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(std::string("bad checkpoint shape: ") + e.what());
    }
    for (double& p : net.parameters()) {
        if (!(in >> p)) throw std::runtime_error("truncated checkpoint body");
    }
    return net;
}

void save_checkpoint(const std::string& path, const Mlp& net) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write checkpoint " + path);
    save_checkpoint(out, net);
}

Mlp load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read checkpoint " + path);
    return load_checkpoint(in);
}

}  // namespace qas
