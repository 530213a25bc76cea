#include "foilgen/nn.hpp"

#include <cmath>
#include <string>

#include "foilgen/error.hpp"

namespace foilgen::nn {

std::string_view to_string(Activation a) {
    switch (a) {
        case Activation::Linear: return "linear";
        case Activation::Relu: return "relu";
        case Activation::Tanh: return "tanh";
        case Activation::Sigmoid: return "sigmoid";
        case Activation::Softplus: return "softplus";
    }
    return "linear";
}

Activation activation_from_string(std::string_view s) {
    for (Activation a : {Activation::Linear, Activation::Relu, Activation::Tanh, Activation::Sigmoid,
                         Activation::Softplus}) {
        if (to_string(a) == s) return a;
    }
    throw FormatError("unknown activation '" + std::string(s) + "'");
}

double softplus(double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Matrix apply(Activation a, const Matrix& pre) {
    switch (a) {
        case Activation::Linear: return pre;
        case Activation::Relu: return pre.cwiseMax(0.0);
        case Activation::Tanh: return pre.array().tanh().matrix();
        case Activation::Sigmoid: return pre.unaryExpr([](double v) { return sigmoid(v); });
        case Activation::Softplus: return pre.unaryExpr([](double v) { return softplus(v); });
    }
    return pre;
}

Matrix derivative(Activation a, const Matrix& pre, const Matrix& out) {
    switch (a) {
        case Activation::Linear: return Matrix::Ones(pre.rows(), pre.cols());
        case Activation::Relu: return pre.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
        case Activation::Tanh: return (1.0 - out.array().square()).matrix();
        case Activation::Sigmoid: return (out.array() * (1.0 - out.array())).matrix();
        case Activation::Softplus: return pre.unaryExpr([](double v) { return sigmoid(v); });
    }
    return Matrix::Ones(pre.rows(), pre.cols());
}

bool Layer::operator==(const Layer& o) const {
    return act == o.act && weight.rows() == o.weight.rows() && weight.cols() == o.weight.cols() &&
           bias.size() == o.bias.size() && weight == o.weight && bias == o.bias;
}

Mlp Mlp::make(const std::vector<int>& dims, Activation hidden, Activation output, Rng& rng) {
    if (dims.size() < 2) throw ParameterError("an MLP needs at least input and output sizes");
    for (int d : dims) {
        if (d <= 0) throw ParameterError("layer sizes must be positive");
    }
    Mlp m;
    for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
        Layer l;
        const double bound = 1.0 / std::sqrt(static_cast<double>(dims[i]));
        l.weight.resize(dims[i + 1], dims[i]);
        // Fill row by row so the draw order matches the checkpoint layout.
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = rng.uniform(-bound, bound);
        }
        l.bias = Vector::Zero(dims[i + 1]);
        l.act = i + 2 == dims.size() ? output : hidden;
        m.layers.push_back(std::move(l));
    }
    return m;
}

std::vector<int> Mlp::dims() const {
    std::vector<int> d;
    if (layers.empty()) return d;
    d.push_back(static_cast<int>(layers.front().in()));
    for (const auto& l : layers) d.push_back(static_cast<int>(l.out()));
    return d;
}

std::size_t Mlp::parameter_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += static_cast<std::size_t>(l.weight.size() + l.bias.size());
    return n;
}

bool Mlp::all_finite() const {
    for (const auto& l : layers) {
        if (!l.weight.allFinite() || !l.bias.allFinite()) return false;
    }
    return true;
}

ForwardCache forward(const Mlp& model, const Matrix& x) {
    if (model.layers.empty()) throw ModelError("forward on an empty model");
    if (x.cols() != model.input_dim()) {
        throw ModelError("input width " + std::to_string(x.cols()) + " does not match model input " +
                         std::to_string(model.input_dim()));
    }
    ForwardCache cache;
    cache.inputs.reserve(model.layers.size());
    cache.pre.reserve(model.layers.size());
    Matrix a = x;
    for (const auto& l : model.layers) {
        cache.inputs.push_back(a);
        Matrix z = a * l.weight.transpose();
        z.rowwise() += l.bias.transpose();
        a = apply(l.act, z);
        cache.pre.push_back(std::move(z));
    }
    cache.output = std::move(a);
    return cache;
}

Gradients Gradients::zeros_like(const Mlp& model) {
    Gradients g;
    for (const auto& l : model.layers) {
        g.weight.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        g.bias.push_back(Vector::Zero(l.bias.size()));
    }
    return g;
}

Gradients& Gradients::operator+=(const Gradients& other) {
    for (std::size_t i = 0; i < weight.size(); ++i) {
        weight[i] += other.weight[i];
        bias[i] += other.bias[i];
    }
    return *this;
}

bool Gradients::all_finite() const {
    for (std::size_t i = 0; i < weight.size(); ++i) {
        if (!weight[i].allFinite() || !bias[i].allFinite()) return false;
    }
    return true;
}

Gradients backward(const Mlp& model, const ForwardCache& cache, const Matrix& dout, bool input_grad) {
    if (cache.pre.size() != model.layers.size()) throw ModelError("forward cache does not belong to this model");
    if (dout.rows() != cache.output.rows() || dout.cols() != cache.output.cols()) {
        throw ModelError("output gradient shape does not match the forward output");
    }
    Gradients g;
    g.weight.resize(model.layers.size());
    g.bias.resize(model.layers.size());
    Matrix delta = dout;
    for (std::size_t k = model.layers.size(); k-- > 0;) {
        const Layer& l = model.layers[k];
        const Matrix& out = k + 1 == model.layers.size() ? cache.output : cache.inputs[k + 1];
        if (l.act != Activation::Linear) delta = delta.cwiseProduct(derivative(l.act, cache.pre[k], out));
        g.weight[k].noalias() = delta.transpose() * cache.inputs[k];
        g.bias[k] = delta.colwise().sum().transpose();
        if (k == 0 && !input_grad) return g;
        delta = delta * l.weight;
    }
    g.input = std::move(delta);
    return g;
}

AdamState AdamState::for_model(const Mlp& model) {
    AdamState s;
    for (const auto& l : model.layers) {
        s.m_w.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        s.v_w.push_back(Matrix::Zero(l.weight.rows(), l.weight.cols()));
        s.m_b.push_back(Vector::Zero(l.bias.size()));
        s.v_b.push_back(Vector::Zero(l.bias.size()));
    }
    return s;
}

void adam_step(Mlp& model, const Gradients& grads, AdamState& state, const AdamConfig& cfg) {
    if (grads.weight.size() != model.layers.size() || state.m_w.size() != model.layers.size()) {
        throw ModelError("Adam state or gradients do not match the model");
    }
    for (std::size_t k = 0; k < grads.weight.size(); ++k) {
        if (!grads.weight[k].allFinite() || !grads.bias[k].allFinite()) {
            throw TrainingError("non-finite gradient in layer " + std::to_string(k) + " at Adam step " +
                                std::to_string(state.step + 1));
        }
    }
    ++state.step;
    const double t = static_cast<double>(state.step);
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    const double lr = cfg.learning_rate;
    auto update = [&](auto& param, const auto& g, auto& m, auto& v) {
        m.array() = cfg.beta1 * m.array() + (1.0 - cfg.beta1) * g.array();
        v.array() = cfg.beta2 * v.array() + (1.0 - cfg.beta2) * g.array().square();
        param.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + cfg.epsilon);
    };
    for (std::size_t k = 0; k < model.layers.size(); ++k) {
        update(model.layers[k].weight, grads.weight[k], state.m_w[k], state.v_w[k]);
        update(model.layers[k].bias, grads.bias[k], state.m_b[k], state.v_b[k]);
    }
}

void TrainConfig::validate() const {
    if (epochs < 0) throw ParameterError("epochs must be non-negative");
    if (batch_size <= 0) throw ParameterError("batch size must be positive");
    if (!(adam.learning_rate >= 0.0)) throw ParameterError("learning rate must be non-negative");
    if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
        throw ParameterError("Adam betas must lie in [0, 1)");
    }
    if (!(adam.epsilon > 0.0)) throw ParameterError("Adam epsilon must be positive");
    if (!(kl_weight >= 0.0)) throw ParameterError("kl_weight must be non-negative");
}

}  // namespace foilgen::nn
