#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "foilgen/random.hpp"

namespace foilgen::nn {

// Batches are row-major in the sense of one sample per row: X is (batch x in),
// a layer computes act(X W^T + b).
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { Linear, Relu, Tanh, Sigmoid, Softplus };

std::string_view to_string(Activation a);
Activation activation_from_string(std::string_view s);

double softplus(double x);
double sigmoid(double x);
Matrix apply(Activation a, const Matrix& pre);
// d act / d pre, evaluated from the pre-activation and the activation output.
Matrix derivative(Activation a, const Matrix& pre, const Matrix& out);

struct Layer {
    Matrix weight;  // out x in
    Vector bias;    // out
    Activation act = Activation::Linear;

    Eigen::Index in() const { return weight.cols(); }
    Eigen::Index out() const { return weight.rows(); }
    bool operator==(const Layer&) const;
};

struct Mlp {
    std::vector<Layer> layers;

    // dims = {in, h1, ..., out}. Hidden layers use `hidden`, the last `output`.
    // Weights uniform in +-1/sqrt(fan_in), biases zero.
    static Mlp make(const std::vector<int>& dims, Activation hidden, Activation output, Rng& rng);

    Eigen::Index input_dim() const { return layers.front().in(); }
    Eigen::Index output_dim() const { return layers.back().out(); }
    std::vector<int> dims() const;
    std::size_t parameter_count() const;
    bool all_finite() const;
    bool operator==(const Mlp&) const = default;
};

struct ForwardCache {
    std::vector<Matrix> inputs;  // input to each layer; inputs[0] is the batch
    std::vector<Matrix> pre;     // X W^T + b per layer
    Matrix output;
};

ForwardCache forward(const Mlp& model, const Matrix& x);

struct Gradients {
    std::vector<Matrix> weight;
    std::vector<Vector> bias;
    Matrix input;  // d loss / d input batch

    static Gradients zeros_like(const Mlp& model);
    Gradients& operator+=(const Gradients& other);
    bool all_finite() const;
};

// Reverse-mode pass for d loss / d output = dout (same shape as the output).
// With input_grad false, Gradients::input is left empty.
Gradients backward(const Mlp& model, const ForwardCache& cache, const Matrix& dout, bool input_grad = true);

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct AdamState {
    std::vector<Matrix> m_w, v_w;
    std::vector<Vector> m_b, v_b;
    std::int64_t step = 0;

    static AdamState for_model(const Mlp& model);
};

// One bias-corrected Adam update. Throws TrainingError (model untouched) if
// any gradient entry is not finite.
void adam_step(Mlp& model, const Gradients& grads, AdamState& state, const AdamConfig& cfg);

struct TrainConfig {
    int epochs = 500;
    int batch_size = 64;
    AdamConfig adam;
    double kl_weight = 1.0;
    std::uint64_t seed = 1;

    void validate() const;
};

}  // namespace foilgen::nn
