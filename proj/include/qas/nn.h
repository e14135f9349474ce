#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace qas {

/// Layer widths of a tanh MLP: input -> hidden... -> output, with tanh after
/// every hidden layer and a linear output.
struct MlpShape {
    int inputs = 0;
    std::vector<int> hidden;
    int outputs = 0;

    /// The actor/critic body: two hidden layers of 64.
    static MlpShape standard(int inputs, int outputs) {
        return {inputs, {64, 64}, outputs};
    }

    std::size_t layer_count() const { return hidden.size() + 1; }
    int fan_in(std::size_t layer) const;
    int fan_out(std::size_t layer) const;
    std::size_t parameter_count() const;

    bool operator==(const MlpShape&) const = default;
};

/// Activations of one forward pass: activations[0] is the input,
/// activations[k] the tanh output of hidden layer k, and `output` the raw
/// linear output of the last layer.
struct GradTape {
    MlpShape shape;
    std::vector<std::vector<double>> activations;
    std::vector<double> output;
};

/// Fully connected tanh network with all weights and biases in one flat
/// buffer. Layer k stores a row-major fan_out x fan_in weight matrix followed
/// by fan_out biases.
class Mlp {
  public:
    Mlp() = default;
    explicit Mlp(MlpShape shape);  // all parameters zero

    /// Weights uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)], same for biases.
    static Mlp initialized(MlpShape shape, std::mt19937_64& rng);

    const MlpShape& shape() const { return shape_; }
    std::span<double> parameters() { return params_; }
    std::span<const double> parameters() const { return params_; }

    std::span<double> weights(std::size_t layer);
    std::span<double> biases(std::size_t layer);
    std::span<const double> weights(std::size_t layer) const;
    std::span<const double> biases(std::size_t layer) const;

    GradTape forward(std::span<const double> input) const;

    /// Adds d(loss)/d(params) into `grad` given d(loss)/d(output).
    void backward(const GradTape& tape, std::span<const double> d_output,
                  std::span<double> grad) const;

  private:
    std::size_t layer_offset(std::size_t layer) const;

    MlpShape shape_;
    std::vector<double> params_;
};

std::vector<double> softmax(std::span<const double> logits);
std::vector<double> log_softmax(std::span<const double> logits);

/// Softmax over the actor's output.
std::vector<double> policy_forward(const Mlp& actor,
                                   std::span<const double> obs);
/// Scalar critic output.
double value_forward(const Mlp& critic, std::span<const double> obs);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t t = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

/// One Adam update of `params` in place; advances `state.t`. Throws on shape
/// mismatch, non-finite gradients or a non-positive learning rate.
void adam_step(std::span<double> params, std::span<const double> grads,
               AdamState& state, double learning_rate);

// Text checkpoint: a header line "qas-mlp <layers+1> <width...>" followed by
// one parameter per line in buffer order.
void save_checkpoint(std::ostream& out, const Mlp& net);
Mlp load_checkpoint(std::istream& in);
void save_checkpoint(const std::string& path, const Mlp& net);
Mlp load_checkpoint(const std::string& path);

}  // namespace qas
