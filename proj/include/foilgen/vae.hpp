#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "foilgen/error.hpp"
#include "foilgen/geometry.hpp"
#include "foilgen/nn.hpp"
#include "foilgen/vmf.hpp"

namespace foilgen::vae {

using nn::Matrix;

enum class LatentKind { Gauss, Sphere };

std::string_view to_string(LatentKind k);
LatentKind latent_kind_from_string(std::string_view s);

inline constexpr double kKappaMin = 1e-3;
inline constexpr double kKappaMax = 5e3;

struct ModelConfig {
    LatentKind kind = LatentKind::Sphere;
    int latent_dim = 2;
    int points = static_cast<int>(geometry::kDefaultPoints);
    // false gives the plain VAE: no label node on encoder or decoder.
    bool use_label = true;
    std::vector<int> hidden{500, 500};
    nn::Activation hidden_activation = nn::Activation::Relu;

    void validate() const;
    int shape_width() const { return 2 * points; }
    // d for Gauss, d + 1 for the sphere embedding.
    int latent_width() const { return kind == LatentKind::Sphere ? latent_dim + 1 : latent_dim; }
    int head_width() const { return kind == LatentKind::Sphere ? latent_dim + 2 : 2 * latent_dim; }
    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

struct CvaeModel {
    ModelConfig config;
    nn::Mlp encoder;  // hidden = {n1, n2}
    nn::Mlp decoder;  // hidden reversed = {n2, n1}
    std::uint64_t seed = 0;

    static CvaeModel make(const ModelConfig& config, std::uint64_t seed);
    friend bool operator==(const CvaeModel&, const CvaeModel&) = default;
};

using Latent = std::variant<GaussLatent, SphereLatent>;

// Shape vectors use the geometry flatten layout (x_1..x_n, y_1..y_n).
Latent encode(const CvaeModel& model, std::span<const double> shape, double label);
// Posterior mean: mu for Gauss, the mean direction for the sphere.
Vector latent_mean(const Latent& lat);
Vector sample_latent(const Latent& lat, Rng& rng);

// Raw decoder output for one latent vector; sphere models require |z| = 1
// within 1e-6.
Vector decode_vector(const CvaeModel& model, const Vector& z, double label);
geometry::AirfoilShape decode(const CvaeModel& model, const Vector& z, double label);

struct LossParts {
    double total = 0.0;
    double rec = 0.0;  // batch mean of |x - y|^2
    double kl = 0.0;   // batch mean
};

struct Batch {
    Matrix shapes;  // one flattened shape per row
    Vector labels;
};

// Noise for one batch: Gaussian normals (rows x d) or vMF draws per row.
struct BatchNoise {
    Matrix normals;
    std::vector<VmfNoise> vmf;
};

// Same draws loss_and_gradients(model, batch, rng, ...) would make.
BatchNoise draw_noise(const CvaeModel& model, const Batch& batch, Rng& rng);

struct LossGradients {
    LossParts loss;
    nn::Gradients encoder;
    nn::Gradients decoder;
};

// total = rec + kl_weight * kl. With noise == nullptr the posterior mean is
// decoded (test-time reconstruction).
LossParts loss(const CvaeModel& model, const Batch& batch, const BatchNoise* noise, double kl_weight);
LossGradients loss_and_gradients(const CvaeModel& model, const Batch& batch, const BatchNoise& noise,
                                 double kl_weight);
LossGradients loss_and_gradients(const CvaeModel& model, const Batch& batch, Rng& rng, double kl_weight);

struct EpochLoss {
    double total = 0.0;
    double rec = 0.0;
    double kl = 0.0;
};

struct TrainTrace {
    std::vector<EpochLoss> train;
    std::vector<EpochLoss> test;
};

struct TrainResult {
    CvaeModel model;
    TrainTrace trace;
};

// Thrown when a batch produces a non-finite loss or gradient; carries the
// model as it was after the last completed epoch.
class TrainingAborted : public TrainingError {
public:
    TrainingAborted(const std::string& what, TrainResult last_good)
        : TrainingError(what), last_good_(std::move(last_good)) {}
    const TrainResult& last_good() const { return last_good_; }

private:
    TrainResult last_good_;
};

using EpochCallback = std::function<void(int epoch, const TrainResult&)>;

// Minibatch Adam. The test split only feeds the trace (posterior-mean
// reconstruction). The rng for shuffling and latent noise is seeded from
// config.seed.
TrainResult train(CvaeModel model, const Batch& train_set, const Batch& test_set, const nn::TrainConfig& config,
                  const EpochCallback& on_epoch = {});

// Self-describing JSON checkpoint; doubles round-trip bit-exactly.
std::string checkpoint_to_json(const CvaeModel& model);
CvaeModel checkpoint_from_json(std::string_view text);
void save_checkpoint(const CvaeModel& model, const std::string& path);
CvaeModel load_checkpoint(const std::string& path);

}  // namespace foilgen::vae
