#include "foilgen/vae.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numeric>
#include <sstream>

namespace foilgen::vae {

using nlohmann::json;

std::string_view to_string(LatentKind k) { return k == LatentKind::Sphere ? "sphere" : "gauss"; }

LatentKind latent_kind_from_string(std::string_view s) {
    if (s == "sphere") return LatentKind::Sphere;
    if (s == "gauss") return LatentKind::Gauss;
    throw FormatError("unknown latent kind '" + std::string(s) + "'");
}

void ModelConfig::validate() const {
    if (latent_dim < 1) throw ParameterError("latent dimension must be >= 1");
    if (points < 3) throw ParameterError("shape point count must be >= 3");
    for (int h : hidden) {
        if (h <= 0) throw ParameterError("hidden layer sizes must be positive");
    }
}

CvaeModel CvaeModel::make(const ModelConfig& config, std::uint64_t seed) {
    config.validate();
    const int label = config.use_label ? 1 : 0;
    std::vector<int> enc{config.shape_width() + label};
    enc.insert(enc.end(), config.hidden.begin(), config.hidden.end());
    enc.push_back(config.head_width());
    std::vector<int> dec{config.latent_width() + label};
    dec.insert(dec.end(), config.hidden.rbegin(), config.hidden.rend());
    dec.push_back(config.shape_width());

    Rng rng(seed);
    CvaeModel m;
    m.config = config;
    m.seed = seed;
    m.encoder = nn::Mlp::make(enc, config.hidden_activation, nn::Activation::Linear, rng);
    m.decoder = nn::Mlp::make(dec, config.hidden_activation, nn::Activation::Linear, rng);
    return m;
}

namespace {

bool in_open(double v, double lo, double hi) { return v > lo && v < hi; }

Matrix with_labels(const Matrix& x, const Vector& labels, bool use_label) {
    if (!use_label) return x;
    Matrix out(x.rows(), x.cols() + 1);
    out.leftCols(x.cols()) = x;
    out.col(x.cols()) = labels;
    return out;
}

// Everything one batch pass produces, kept for the backward sweep.
struct Pass {
    nn::ForwardCache enc;
    Matrix mu;         // Gauss mean or normalized sphere direction
    Matrix sigma;      // Gauss only
    Vector raw_norm;   // sphere only: |raw mu|
    Vector kappa;      // sphere only
    Matrix z;
    nn::ForwardCache dec;
    Vector rec;
    Vector kl;
};

void check_batch(const CvaeModel& model, const Batch& batch) {
    if (batch.shapes.rows() == 0) throw ParameterError("loss needs a non-empty batch");
    if (batch.shapes.cols() != model.config.shape_width()) {
        throw ShapeError("batch shape width " + std::to_string(batch.shapes.cols()) + " does not match model width " +
                         std::to_string(model.config.shape_width()));
    }
    if (batch.labels.size() != batch.shapes.rows()) throw ParameterError("one label per batch row required");
}

// With rng set, noise is drawn into *noise during the pass (vMF noise needs
// kappa from the encoder).
Pass run(const CvaeModel& model, const Batch& batch, BatchNoise* noise, Rng* rng = nullptr) {
    const auto& cfg = model.config;
    const Eigen::Index rows = batch.shapes.rows();
    const int d = cfg.latent_dim;
    Pass p;
    p.enc = nn::forward(model.encoder, with_labels(batch.shapes, batch.labels, cfg.use_label));
    const Matrix& head = p.enc.output;
    if (!head.allFinite()) throw ModelError("encoder produced non-finite activations");

    p.kl.resize(rows);
    if (cfg.kind == LatentKind::Gauss) {
        p.mu = head.leftCols(d);
        p.sigma = head.rightCols(d).unaryExpr([](double v) { return std::max(nn::softplus(v), kSigmaFloor); });
        p.z = p.mu;
        if (noise && rng) {
            noise->normals.resize(rows, d);
            for (Eigen::Index r = 0; r < rows; ++r) {
                for (int c = 0; c < d; ++c) noise->normals(r, c) = rng->normal();
            }
        }
        if (noise) p.z += p.sigma.cwiseProduct(noise->normals);
        for (Eigen::Index r = 0; r < rows; ++r) p.kl(r) = kl_gauss({p.mu.row(r).transpose(), p.sigma.row(r).transpose()});
    } else {
        const int m = d + 1;
        p.mu = head.leftCols(m);
        if (noise && rng) noise->vmf.clear();
        p.raw_norm = p.mu.rowwise().norm();
        p.kappa.resize(rows);
        p.z.resize(rows, m);
        for (Eigen::Index r = 0; r < rows; ++r) {
            if (!std::isfinite(p.raw_norm(r))) throw ModelError("encoder mean direction is not finite");
            if (p.raw_norm(r) > 0.0) {
                p.mu.row(r) /= p.raw_norm(r);
            } else {
                // All-zero head (e.g. dead ReLUs): fall back to the first axis.
                p.mu.row(r).setZero();
                p.mu(r, 0) = 1.0;
            }
            p.kappa(r) = std::clamp(nn::softplus(head(r, m)), kKappaMin, kKappaMax);
            p.kl(r) = kl_vmf(p.kappa(r), d);
            if (noise && rng) noise->vmf.push_back(draw_vmf_noise(p.kappa(r), m, *rng));
            if (noise) {
                p.z.row(r) = vmf_transform(p.mu.row(r).transpose(), p.kappa(r), noise->vmf[r]).transpose();
            } else {
                p.z.row(r) = p.mu.row(r);
            }
        }
    }
    p.dec = nn::forward(model.decoder, with_labels(p.z, batch.labels, cfg.use_label));
    p.rec = (p.dec.output - batch.shapes).rowwise().squaredNorm();
    return p;
}

LossParts summarize(const Pass& p, double kl_weight) {
    LossParts l;
    l.rec = p.rec.mean();
    l.kl = p.kl.mean();
    l.total = l.rec + kl_weight * l.kl;
    return l;
}

}  // namespace

Latent encode(const CvaeModel& model, std::span<const double> shape, double label) {
    if (static_cast<int>(shape.size()) != model.config.shape_width()) {
        throw ShapeError("shape vector has length " + std::to_string(shape.size()) + ", model expects " +
                         std::to_string(model.config.shape_width()));
    }
    for (double v : shape) {
        if (!std::isfinite(v)) throw InputError("shape vector is not finite");
    }
    if (!std::isfinite(label)) throw InputError("label is not finite");
    Batch b;
    b.shapes = Eigen::Map<const Matrix>(shape.data(), 1, static_cast<Eigen::Index>(shape.size()));
    b.labels = Vector::Constant(1, label);
    const Pass p = run(model, b, nullptr);
    if (model.config.kind == LatentKind::Gauss) return GaussLatent{p.mu.row(0).transpose(), p.sigma.row(0).transpose()};
    return SphereLatent{p.mu.row(0).transpose(), p.kappa(0)};
}

Vector latent_mean(const Latent& lat) {
    return std::visit([](const auto& l) { return Vector(l.mu); }, lat);
}

Vector sample_latent(const Latent& lat, Rng& rng) {
    if (const auto* g = std::get_if<GaussLatent>(&lat)) return sample_gauss(*g, rng);
    return sample_vmf(std::get<SphereLatent>(lat), rng);
}

Vector decode_vector(const CvaeModel& model, const Vector& z, double label) {
    const auto& cfg = model.config;
    if (z.size() != cfg.latent_width()) {
        throw InputError("latent vector has size " + std::to_string(z.size()) + ", model expects " +
                         std::to_string(cfg.latent_width()));
    }
    if (!z.allFinite() || !std::isfinite(label)) throw InputError("latent vector or label is not finite");
    if (cfg.kind == LatentKind::Sphere && std::abs(z.norm() - 1.0) > 1e-6) {
        throw InputError("sphere model needs |z| = 1, got " + std::to_string(z.norm()));
    }
    Matrix in(1, z.size() + (cfg.use_label ? 1 : 0));
    in.leftCols(z.size()) = z.transpose();
    if (cfg.use_label) in(0, z.size()) = label;
    return nn::forward(model.decoder, in).output.row(0).transpose();
}

geometry::AirfoilShape decode(const CvaeModel& model, const Vector& z, double label) {
    Vector s = decode_vector(model, z, label);
    const Eigen::Index n = model.config.points;
    // Close the outline: first and last point become their average.
    for (Eigen::Index off : {Eigen::Index{0}, n}) {
        const double avg = 0.5 * (s(off) + s(off + n - 1));
        s(off) = avg;
        s(off + n - 1) = avg;
    }
    return geometry::unflatten(std::span<const double>(s.data(), static_cast<std::size_t>(s.size())),
                               static_cast<std::size_t>(n));
}

BatchNoise draw_noise(const CvaeModel& model, const Batch& batch, Rng& rng) {
    check_batch(model, batch);
    BatchNoise noise;
    run(model, batch, &noise, &rng);
    return noise;
}

LossParts loss(const CvaeModel& model, const Batch& batch, const BatchNoise* noise, double kl_weight) {
    check_batch(model, batch);
    BatchNoise copy;
    if (noise) copy = *noise;
    return summarize(run(model, batch, noise ? &copy : nullptr), kl_weight);
}

namespace {

LossGradients backprop(const CvaeModel& model, const Batch& batch, const BatchNoise& noise, const Pass& p,
                       double kl_weight) {
    const auto& cfg = model.config;
    const Eigen::Index rows = batch.shapes.rows();
    LossGradients out;
    out.loss = summarize(p, kl_weight);

    const double inv = 1.0 / static_cast<double>(rows);
    const double kw = kl_weight * inv;
    const Matrix dy = (2.0 * inv) * (p.dec.output - batch.shapes);
    out.decoder = nn::backward(model.decoder, p.dec, dy);
    const Matrix dz = out.decoder.input.leftCols(cfg.latent_width());

    const Matrix& head = p.enc.output;
    Matrix dhead = Matrix::Zero(rows, head.cols());
    const int d = cfg.latent_dim;
    if (cfg.kind == LatentKind::Gauss) {
        const Matrix dmu = dz + kw * p.mu;
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (int i = 0; i < d; ++i) {
                dhead(r, i) = dmu(r, i);
                const double s = p.sigma(r, i);
                if (nn::softplus(head(r, d + i)) <= kSigmaFloor) continue;
                const double ds = dz(r, i) * noise.normals(r, i) + kw * (s - 1.0 / s);
                dhead(r, d + i) = ds * nn::sigmoid(head(r, d + i));
            }
        }
    } else {
        const int m = d + 1;
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Vector mu = p.mu.row(r).transpose();
            Vector dmu;
            double dkappa = 0.0;
            vmf_transform_grad(mu, p.kappa(r), noise.vmf[r], dz.row(r).transpose(), dmu, dkappa);
            dkappa += kw * kl_vmf_dkappa(p.kappa(r), d);
            // At a zero head the unit-scale tangent gradient pushes the head off zero.
            const double scale = p.raw_norm(r) > 0.0 ? p.raw_norm(r) : 1.0;
            dhead.row(r).head(m) = ((dmu - mu * mu.dot(dmu)) / scale).transpose();
            if (in_open(nn::softplus(head(r, m)), kKappaMin, kKappaMax)) {
                dhead(r, m) = dkappa * nn::sigmoid(head(r, m));
            }
        }
    }
    out.encoder = nn::backward(model.encoder, p.enc, dhead, false);
    return out;
}

}  // namespace

LossGradients loss_and_gradients(const CvaeModel& model, const Batch& batch, const BatchNoise& noise,
                                 double kl_weight) {
    check_batch(model, batch);
    const Eigen::Index rows = batch.shapes.rows();
    if (model.config.kind == LatentKind::Sphere && static_cast<Eigen::Index>(noise.vmf.size()) != rows) {
        throw ParameterError("vMF noise needed for every batch row");
    }
    if (model.config.kind == LatentKind::Gauss &&
        (noise.normals.rows() != rows || noise.normals.cols() != model.config.latent_dim)) {
        throw ParameterError("Gaussian noise needed for every batch row");
    }
    BatchNoise copy = noise;
    return backprop(model, batch, copy, run(model, batch, &copy), kl_weight);
}

LossGradients loss_and_gradients(const CvaeModel& model, const Batch& batch, Rng& rng, double kl_weight) {
    check_batch(model, batch);
    BatchNoise noise;
    const Pass p = run(model, batch, &noise, &rng);
    return backprop(model, batch, noise, p, kl_weight);
}

TrainResult train(CvaeModel model, const Batch& train_set, const Batch& test_set, const nn::TrainConfig& config,
                  const EpochCallback& on_epoch) {
    config.validate();
    check_batch(model, train_set);
    const bool has_test = test_set.shapes.rows() > 0;
    if (has_test) check_batch(model, test_set);

    Rng rng(config.seed);
    auto enc_state = nn::AdamState::for_model(model.encoder);
    auto dec_state = nn::AdamState::for_model(model.decoder);
    const Eigen::Index n = train_set.shapes.rows();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});

    TrainResult last{model, {}};
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        EpochLoss acc;
        for (Eigen::Index start = 0; start < n; start += config.batch_size) {
            const Eigen::Index rows = std::min<Eigen::Index>(config.batch_size, n - start);
            Batch b;
            b.shapes.resize(rows, train_set.shapes.cols());
            b.labels.resize(rows);
            for (Eigen::Index r = 0; r < rows; ++r) {
                const Eigen::Index src = order[static_cast<std::size_t>(start + r)];
                b.shapes.row(r) = train_set.shapes.row(src);
                b.labels(r) = train_set.labels(src);
            }
            LossGradients g;
            try {
                g = loss_and_gradients(model, b, rng, config.kl_weight);
            } catch (const ModelError& e) {
                throw TrainingAborted(std::string("training aborted at epoch ") + std::to_string(epoch) + ": " + e.what(),
                                      last);
            }
            if (!std::isfinite(g.loss.total) || !g.encoder.all_finite() || !g.decoder.all_finite()) {
                throw TrainingAborted("non-finite loss or gradient at epoch " + std::to_string(epoch), last);
            }
            nn::adam_step(model.encoder, g.encoder, enc_state, config.adam);
            nn::adam_step(model.decoder, g.decoder, dec_state, config.adam);
            const double wgt = static_cast<double>(rows);
            acc.total += g.loss.total * wgt;
            acc.rec += g.loss.rec * wgt;
            acc.kl += g.loss.kl * wgt;
        }
        const double inv = 1.0 / static_cast<double>(n);
        last.trace.train.push_back({acc.total * inv, acc.rec * inv, acc.kl * inv});
        if (has_test) {
            const LossParts t = loss(model, test_set, nullptr, config.kl_weight);
            last.trace.test.push_back({t.total, t.rec, t.kl});
        }
        last.model = model;
        if (on_epoch) on_epoch(epoch, last);
    }
    last.model = std::move(model);
    return last;
}

namespace {

constexpr const char* kCheckpointFormat = "foilgen-checkpoint";
constexpr int kCheckpointVersion = 1;

json mlp_to_json(const nn::Mlp& m) {
    json layers = json::array();
    for (const auto& l : m.layers) {
        std::vector<double> w(static_cast<std::size_t>(l.weight.size()));
        for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < l.weight.cols(); ++c) {
                w[static_cast<std::size_t>(r * l.weight.cols() + c)] = l.weight(r, c);
            }
        }
        layers.push_back({{"rows", l.weight.rows()},
                          {"cols", l.weight.cols()},
                          {"activation", nn::to_string(l.act)},
                          {"weight", std::move(w)},
                          {"bias", std::vector<double>(l.bias.data(), l.bias.data() + l.bias.size())}});
    }
    return layers;
}

nn::Mlp mlp_from_json(const json& j) {
    nn::Mlp m;
    for (const auto& jl : j) {
        nn::Layer l;
        const auto rows = jl.at("rows").get<Eigen::Index>();
        const auto cols = jl.at("cols").get<Eigen::Index>();
        const auto w = jl.at("weight").get<std::vector<double>>();
        const auto b = jl.at("bias").get<std::vector<double>>();
        if (rows <= 0 || cols <= 0 || static_cast<Eigen::Index>(w.size()) != rows * cols ||
            static_cast<Eigen::Index>(b.size()) != rows) {
            throw FormatError("checkpoint layer dimensions do not match its data");
        }
        l.weight.resize(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r) {
            for (Eigen::Index c = 0; c < cols; ++c) l.weight(r, c) = w[static_cast<std::size_t>(r * cols + c)];
        }
        l.bias = Eigen::Map<const Vector>(b.data(), rows);
        l.act = nn::activation_from_string(jl.at("activation").get<std::string>());
        if (!m.layers.empty() && m.layers.back().out() != cols) throw FormatError("checkpoint layers do not chain");
        m.layers.push_back(std::move(l));
    }
    if (m.layers.empty()) throw FormatError("checkpoint network has no layers");
    return m;
}

}  // namespace

std::string checkpoint_to_json(const CvaeModel& model) {
    const auto& c = model.config;
    json j = {{"format", kCheckpointFormat},
              {"version", kCheckpointVersion},
              {"config",
               {{"kind", to_string(c.kind)},
                {"latent_dim", c.latent_dim},
                {"points", c.points},
                {"use_label", c.use_label},
                {"hidden", c.hidden},
                {"hidden_activation", nn::to_string(c.hidden_activation)}}},
              {"seed", model.seed},
              {"encoder", mlp_to_json(model.encoder)},
              {"decoder", mlp_to_json(model.decoder)}};
    return j.dump();
}

CvaeModel checkpoint_from_json(std::string_view text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("checkpoint is not valid JSON: ") + e.what());
    }
    try {
        if (j.at("format").get<std::string>() != kCheckpointFormat) throw FormatError("not a foilgen checkpoint");
        const int version = j.at("version").get<int>();
        if (version != kCheckpointVersion) {
            throw FormatError("unsupported checkpoint version " + std::to_string(version));
        }
        CvaeModel m;
        const auto& jc = j.at("config");
        m.config.kind = latent_kind_from_string(jc.at("kind").get<std::string>());
        m.config.latent_dim = jc.at("latent_dim").get<int>();
        m.config.points = jc.at("points").get<int>();
        m.config.use_label = jc.at("use_label").get<bool>();
        m.config.hidden = jc.at("hidden").get<std::vector<int>>();
        m.config.hidden_activation = nn::activation_from_string(jc.at("hidden_activation").get<std::string>());
        m.config.validate();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.encoder = mlp_from_json(j.at("encoder"));
        m.decoder = mlp_from_json(j.at("decoder"));
        const int label = m.config.use_label ? 1 : 0;
        if (m.encoder.input_dim() != m.config.shape_width() + label ||
            m.encoder.output_dim() != m.config.head_width() ||
            m.decoder.input_dim() != m.config.latent_width() + label ||
            m.decoder.output_dim() != m.config.shape_width()) {
            throw FormatError("checkpoint network sizes do not match its config");
        }
        return m;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed checkpoint: ") + e.what());
    }
}

void save_checkpoint(const CvaeModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write checkpoint " + path);
    out << checkpoint_to_json(model) << '\n';
    if (!out) throw Error("failed writing checkpoint " + path);
}

CvaeModel load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read checkpoint " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return checkpoint_from_json(ss.str());
}

}  // namespace foilgen::vae
