#include <cmath>

#include "doctest.h"
#include "foilgen/error.hpp"
#include "foilgen/nn.hpp"

using namespace foilgen;
using namespace foilgen::nn;

namespace {

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
    Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = rng.normal();
    }
    return m;
}

double act_naive(Activation a, double v) {
    switch (a) {
        case Activation::Linear: return v;
        case Activation::Relu: return v > 0 ? v : 0;
        case Activation::Tanh: return std::tanh(v);
        case Activation::Sigmoid: return 1.0 / (1.0 + std::exp(-v));
        case Activation::Softplus: return std::log(1.0 + std::exp(v));
    }
    return v;
}

// Straightforward triple-loop evaluation used as the forward oracle.
Matrix naive_forward(const Mlp& m, const Matrix& x) {
    Matrix a = x;
    for (const auto& l : m.layers) {
        Matrix next(a.rows(), l.out());
        for (Eigen::Index s = 0; s < a.rows(); ++s) {
            for (Eigen::Index o = 0; o < l.out(); ++o) {
                double acc = l.bias(o);
                for (Eigen::Index i = 0; i < l.in(); ++i) acc += l.weight(o, i) * a(s, i);
                next(s, o) = act_naive(l.act, acc);
            }
        }
        a = next;
    }
    return a;
}

// loss = sum(output .* weights), so d loss / d output = weights.
double probe_loss(const Mlp& m, const Matrix& x, const Matrix& weights) {
    return forward(m, x).output.cwiseProduct(weights).sum();
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); }

}  // namespace

TEST_CASE("identity linear layer passes its input through") {
    Rng rng(1);
    Mlp m = Mlp::make({4, 4}, Activation::Linear, Activation::Linear, rng);
    m.layers[0].weight = Matrix::Identity(4, 4);
    const Matrix x = random_matrix(3, 4, rng);
    CHECK((forward(m, x).output - x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("zero weights output the activated bias") {
    Rng rng(2);
    for (Activation a : {Activation::Linear, Activation::Relu, Activation::Tanh, Activation::Sigmoid,
                         Activation::Softplus}) {
        Mlp m = Mlp::make({3, 2}, a, a, rng);
        m.layers[0].weight.setZero();
        m.layers[0].bias << -0.7, 1.3;
        const Matrix out = forward(m, random_matrix(5, 3, rng)).output;
        for (Eigen::Index s = 0; s < 5; ++s) {
            CHECK(out(s, 0) == doctest::Approx(act_naive(a, -0.7)).epsilon(1e-15));
            CHECK(out(s, 1) == doctest::Approx(act_naive(a, 1.3)).epsilon(1e-15));
        }
    }
}

TEST_CASE("forward agrees with a naive re-evaluation") {
    Rng rng(3);
    const Mlp m = Mlp::make({6, 9, 7, 4}, Activation::Tanh, Activation::Sigmoid, rng);
    const Matrix x = random_matrix(8, 6, rng);
    CHECK((forward(m, x).output - naive_forward(m, x)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(forward(m, random_matrix(2, 5, rng)), ModelError);
}

TEST_CASE("backward matches central differences for every activation") {
    for (Activation a : {Activation::Linear, Activation::Relu, Activation::Tanh, Activation::Sigmoid,
                         Activation::Softplus}) {
        Rng rng(10 + static_cast<int>(a));
        Mlp m = Mlp::make({7, 5, 3}, a, a, rng);
        for (auto& l : m.layers) l.bias = Vector::Random(l.bias.size()) * 0.3;
        const Matrix x = random_matrix(4, 7, rng);
        const Matrix probe = random_matrix(4, 3, rng);
        const auto g = backward(m, forward(m, x), probe);

        const double h = 1e-5;
        double worst = 0.0;
        for (std::size_t k = 0; k < m.layers.size(); ++k) {
            for (Eigen::Index i = 0; i < m.layers[k].weight.size(); ++i) {
                double& p = m.layers[k].weight.data()[i];
                const double keep = p;
                p = keep + h;
                const double up = probe_loss(m, x, probe);
                p = keep - h;
                const double down = probe_loss(m, x, probe);
                p = keep;
                // ReLU kinks make the difference quotient meaningless nearby.
                if (a == Activation::Relu && std::abs(up + down - 2 * probe_loss(m, x, probe)) > 1e-9) continue;
                worst = std::max(worst, rel_err(g.weight[k].data()[i], (up - down) / (2 * h)));
            }
            for (Eigen::Index i = 0; i < m.layers[k].bias.size(); ++i) {
                double& p = m.layers[k].bias(i);
                const double keep = p;
                p = keep + h;
                const double up = probe_loss(m, x, probe);
                p = keep - h;
                const double down = probe_loss(m, x, probe);
                p = keep;
                if (a == Activation::Relu && std::abs(up + down - 2 * probe_loss(m, x, probe)) > 1e-9) continue;
                worst = std::max(worst, rel_err(g.bias[k](i), (up - down) / (2 * h)));
            }
        }
        // Input gradient as well (the VAE chains encoder and decoder through it).
        Matrix xp = x;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            const double keep = xp.data()[i];
            xp.data()[i] = keep + h;
            const double up = probe_loss(m, xp, probe);
            xp.data()[i] = keep - h;
            const double down = probe_loss(m, xp, probe);
            xp.data()[i] = keep;
            if (a == Activation::Relu && std::abs(up + down - 2 * probe_loss(m, x, probe)) > 1e-9) continue;
            worst = std::max(worst, rel_err(g.input.data()[i], (up - down) / (2 * h)));
        }
        CHECK_MESSAGE(worst < 1e-4, to_string(a));
    }
}

TEST_CASE("linear layer with squared error has the closed-form gradient") {
    Rng rng(4);
    const Mlp m = Mlp::make({3, 2}, Activation::Linear, Activation::Linear, rng);
    const Matrix x = random_matrix(5, 3, rng);
    const Matrix target = random_matrix(5, 2, rng);
    const Matrix err = forward(m, x).output - target;
    const auto g = backward(m, forward(m, x), 2.0 * err);
    CHECK((g.weight[0] - 2.0 * err.transpose() * x).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((g.bias[0] - 2.0 * err.colwise().sum().transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
    Rng rng(5);
    const Mlp m = Mlp::make({4, 6, 3}, Activation::Relu, Activation::Linear, rng);
    const Matrix x = random_matrix(3, 4, rng);
    const auto g = backward(m, forward(m, x), Matrix::Zero(3, 3));
    for (std::size_t k = 0; k < g.weight.size(); ++k) {
        CHECK(g.weight[k].cwiseAbs().maxCoeff() == 0.0);
        CHECK(g.bias[k].cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("Adam leaves parameters alone for zero gradients") {
    Rng rng(6);
    Mlp m = Mlp::make({4, 3}, Activation::Tanh, Activation::Linear, rng);
    const Mlp before = m;
    auto state = AdamState::for_model(m);
    for (int i = 0; i < 3; ++i) adam_step(m, Gradients::zeros_like(m), state, {});
    CHECK(m == before);
}

TEST_CASE("Adam first step moves each parameter by the learning rate against the gradient") {
    Rng rng(7);
    Mlp m = Mlp::make({2, 2}, Activation::Linear, Activation::Linear, rng);
    const Mlp before = m;
    auto g = Gradients::zeros_like(m);
    g.weight[0] << 3.0, -0.2, 1e-3, -50.0;
    g.bias[0] << 0.7, -0.7;
    auto state = AdamState::for_model(m);
    AdamConfig cfg;
    cfg.learning_rate = 0.01;
    adam_step(m, g, state, cfg);
    for (Eigen::Index i = 0; i < 4; ++i) {
        const double step = m.layers[0].weight.data()[i] - before.layers[0].weight.data()[i];
        const double g_abs = std::abs(g.weight[0].data()[i]);
        CHECK(std::abs(std::abs(step) - 0.01 * g_abs / (g_abs + 1e-8)) < 1e-15);
        CHECK(std::abs(std::abs(step) - 0.01) < 1e-6);
        CHECK(step * g.weight[0].data()[i] < 0.0);
    }
}

TEST_CASE("Adam drives a scalar quadratic to its minimum like the direct recurrence") {
    Rng rng(8);
    Mlp m = Mlp::make({1, 1}, Activation::Linear, Activation::Linear, rng);
    m.layers[0].weight(0, 0) = 1.0;
    auto state = AdamState::for_model(m);
    AdamConfig cfg;
    cfg.learning_rate = 0.1;

    double theta = 1.0, mom = 0.0, vel = 0.0;
    for (int t = 1; t <= 200; ++t) {
        auto g = Gradients::zeros_like(m);
        g.weight[0](0, 0) = 2.0 * m.layers[0].weight(0, 0);
        adam_step(m, g, state, cfg);

        const double gt = 2.0 * theta;
        mom = 0.9 * mom + 0.1 * gt;
        vel = 0.999 * vel + 0.001 * gt * gt;
        theta -= 0.1 * (mom / (1 - std::pow(0.9, t))) / (std::sqrt(vel / (1 - std::pow(0.999, t))) + 1e-8);
    }
    CHECK(m.layers[0].weight(0, 0) == doctest::Approx(theta).epsilon(1e-12));
    CHECK(std::abs(theta) < 1e-2);
}

TEST_CASE("Adam rejects non-finite gradients without touching the model") {
    Rng rng(9);
    Mlp m = Mlp::make({2, 2}, Activation::Linear, Activation::Linear, rng);
    const Mlp before = m;
    auto g = Gradients::zeros_like(m);
    g.bias[0](1) = std::nan("");
    auto state = AdamState::for_model(m);
    CHECK_THROWS_AS(adam_step(m, g, state, {}), TrainingError);
    CHECK(m == before);
    CHECK(state.step == 0);
}

TEST_CASE("initialisation is reproducible from the seed") {
    Rng a(42), b(42), c(43);
    CHECK(Mlp::make({5, 4, 3}, Activation::Relu, Activation::Linear, a) ==
          Mlp::make({5, 4, 3}, Activation::Relu, Activation::Linear, b));
    Rng a2(42);
    CHECK_FALSE(Mlp::make({5, 4, 3}, Activation::Relu, Activation::Linear, a2) ==
                Mlp::make({5, 4, 3}, Activation::Relu, Activation::Linear, c));
}
