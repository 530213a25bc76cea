#include "serve.hpp"

#include <cmath>

#include "foilgen/aero.hpp"
#include "foilgen/joukowski_inverse.hpp"
#include "foilgen/metrics.hpp"
#include "httplib.h"

namespace foilgen::app {

namespace {

constexpr std::size_t kMaxSample = 10000;

Reply problem(int status, const std::string& code, const std::string& detail, Json extra = Json::object()) {
    extra["error"] = code;
    extra["detail"] = detail;
    return {status, extra};
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json vector_json(const vae::Vector& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

}  // namespace

Service::Service(vae::CvaeModel model, std::optional<dataset::Dataset> data, ServiceOptions options)
    : model_(std::move(model)), data_(std::move(data)), options_(options) {
    aero::FlowCondition{options_.alpha_deg}.validate();
    Json rows = Json::array();
    if (data_) {
        refs_ = pipeline::ReferenceSets::from(*data_);
        if (model_.config.kind == vae::LatentKind::Gauss && data_->items.size() >= 10) {
            const auto split = dataset::split(*data_, options_.split_seed);
            envelope_ = pipeline::envelope_of(
                pipeline::encode_means(model_, pipeline::to_batch(dataset::select(*data_, split.train))));
        }
        for (const auto& r : pipeline::latent_map(model_, *data_, options_.roundness_stride)) {
            rows.push_back({{"id", r.id},
                            {"z", vector_json(r.z)},
                            {"c_l", r.c_l},
                            {"family", dataset::to_string(r.family)},
                            {"w", number_or_null(r.w)}});
        }
    }
    latent_map_ = {{"columns", {"id", "z", "c_l", "family", "w"}}, {"rows", rows}};
}

Json Service::model_info() const {
    const auto& c = model_.config;
    return {{"kind", vae::to_string(c.kind)},
            {"latent_dim", c.latent_dim},
            {"latent_width", c.latent_width()},
            {"points", c.points},
            {"use_label", c.use_label},
            {"hidden", c.hidden},
            {"hidden_activation", nn::to_string(c.hidden_activation)},
            {"seed", model_.seed},
            {"alpha_deg", options_.alpha_deg},
            {"norm_tolerance", c.kind == vae::LatentKind::Sphere ? Json(1e-6) : Json(nullptr)},
            {"has_dataset", data_.has_value()},
            {"envelope", envelope_ ? Json{{"lower", vector_json(envelope_->lower)}, {"upper", vector_json(envelope_->upper)}}
                                   : Json(nullptr)}};
}

Reply Service::decode(const std::string& body) const {
    Json req;
    try {
        req = Json::parse(body);
    } catch (const Json::exception& e) {
        return problem(400, "bad_json", e.what());
    }
    if (!req.is_object() || !req.contains("z") || !req["z"].is_array() || !req.contains("c_l") ||
        !req["c_l"].is_number()) {
        return problem(400, "bad_request", "expected {\"z\": [numbers], \"c_l\": number}");
    }
    vae::Vector z(static_cast<Eigen::Index>(req["z"].size()));
    for (std::size_t i = 0; i < req["z"].size(); ++i) {
        if (!req["z"][i].is_number()) return problem(400, "bad_request", "z must hold numbers only");
        z(static_cast<Eigen::Index>(i)) = req["z"][i].get<double>();
    }
    const double label = req["c_l"].get<double>();
    if (z.size() != model_.config.latent_width()) {
        return problem(422, "latent_size", "model expects a latent vector of width " +
                                               std::to_string(model_.config.latent_width()),
                       {{"expected", model_.config.latent_width()}, {"got", z.size()}});
    }
    if (model_.config.kind == vae::LatentKind::Sphere && std::abs(z.norm() - 1.0) > 1e-6) {
        return problem(422, "latent_norm", "sphere models need |z| = 1 within 1e-6",
                       {{"norm", z.norm()}, {"tolerance", 1e-6}});
    }
    geometry::AirfoilShape shape;
    try {
        shape = vae::decode(model_, z, label);
    } catch (const InputError& e) {
        return problem(422, "invalid_input", e.what());
    }
    double cl = std::nan("");
    try {
        cl = aero::solve_lift(shape, aero::FlowCondition{options_.alpha_deg}).c_l;
    } catch (const Error&) {
    }
    double w = std::nan("");
    try {
        w = jinv::roundness(shape).w;
    } catch (const jinv::RoundnessError& e) {
        w = e.best().w;
    } catch (const Error&) {
    }
    std::vector<double> xs, ys;
    for (const auto& p : shape.points()) {
        xs.push_back(p.x);
        ys.push_back(p.y);
    }
    Json res = {{"shape", {{"x", xs}, {"y", ys}}},
                {"z", vector_json(z)},
                {"c_l", label},
                {"c_l_recomputed", number_or_null(cl)},
                {"error", number_or_null((label - cl) * (label - cl))},
                {"w", number_or_null(w)}};
    if (data_) {
        const auto flat = geometry::flatten(shape);
        res["distance_to_naca"] = refs_.naca.rows() ? Json(metrics::distance_to_set(flat, refs_.naca)) : Json(nullptr);
        res["distance_to_joukowski"] =
            refs_.joukowski.rows() ? Json(metrics::distance_to_set(flat, refs_.joukowski)) : Json(nullptr);
    }
    return {200, res};
}

Reply Service::sample(const std::string& body) const {
    Json req;
    try {
        req = body.empty() ? Json::object() : Json::parse(body);
    } catch (const Json::exception& e) {
        return problem(400, "bad_json", e.what());
    }
    if (!req.is_object()) return problem(400, "bad_request", "expected a JSON object");
    const auto count_json = req.value("count", Json(30));
    if (!count_json.is_number_integer() || count_json.get<long long>() < 0) {
        return problem(400, "bad_request", "count must be a non-negative integer");
    }
    const auto count = count_json.get<std::size_t>();
    if (count > kMaxSample) return problem(422, "count_too_large", "count is limited to " + std::to_string(kMaxSample));
    const auto mode = req.value("sampling", std::string("random"));
    pipeline::Sampling sampling{};
    try {
        sampling = pipeline::sampling_from_string(mode);
    } catch (const ParameterError& e) {
        return problem(400, "bad_request", e.what());
    }
    if (sampling == pipeline::Sampling::Envelope && model_.config.kind == vae::LatentKind::Sphere) {
        return problem(422, "sampling_mode", "envelope sampling applies to Gaussian-latent models only");
    }
    if (sampling == pipeline::Sampling::Envelope && !envelope_) {
        return problem(422, "no_dataset", "envelope sampling needs the server to be started with --dataset");
    }
    const auto seed_json = req.value("seed", Json(options_.seed));
    if (!seed_json.is_number_unsigned() && !(seed_json.is_number_integer() && seed_json.get<long long>() >= 0)) {
        return problem(400, "bad_request", "seed must be a non-negative integer");
    }
    Rng rng(seed_json.get<std::uint64_t>());
    const auto z = pipeline::sample_latents(model_, count, sampling, envelope_ ? &*envelope_ : nullptr, rng);
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < z.rows(); ++i) rows.push_back(vector_json(z.row(i).transpose()));
    return {200, {{"count", count}, {"sampling", mode}, {"seed", seed_json}, {"latents", rows}}};
}

Reply Service::latent_map() const {
    if (!data_) return problem(404, "no_dataset", "server was started without --dataset");
    return {200, latent_map_};
}

void mount(httplib::Server& server, const Service& service) {
    auto send = [](httplib::Response& res, const Reply& r) {
        res.status = r.status;
        res.set_content(r.body.dump(), "application/json");
    };
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                {"Access-Control-Allow-Headers", "Content-Type"},
                                {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
    server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
    server.Get("/model", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, {200, service.model_info()});
    });
    server.Post("/decode", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.decode(req.body));
    });
    server.Post("/sample", [&service, send](const httplib::Request& req, httplib::Response& res) {
        send(res, service.sample(req.body));
    });
    server.Get("/latent-map", [&service, send](const httplib::Request&, httplib::Response& res) {
        send(res, service.latent_map());
    });
    server.set_exception_handler([send](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        std::string what = "unknown error";
        try {
            std::rethrow_exception(ep);
        } catch (const std::exception& e) {
            what = e.what();
        } catch (...) {
        }
        send(res, problem(500, "internal", what));
    });
}

int serve(const Json& cfg, std::ostream& log) {
    const auto ckpt = cfg.value("checkpoint", std::string());
    if (ckpt.empty()) throw UsageError("missing required option --checkpoint");
    ServiceOptions opt;
    opt.alpha_deg = cfg.value("alpha", 5.0);
    opt.roundness_stride = cfg.value("roundness_stride", std::size_t{0});
    opt.seed = cfg.value("seed", std::uint64_t{1});
    opt.split_seed = cfg.contains("split_seed") ? cfg.at("split_seed").get<std::uint64_t>() : opt.seed;
    std::optional<dataset::Dataset> data;
    if (const auto p = cfg.value("dataset", std::string()); !p.empty()) data = dataset::load(p);
    const Service service(vae::load_checkpoint(ckpt), std::move(data), opt);

    httplib::Server server;
    mount(server, service);
    const auto host = cfg.value("host", std::string("127.0.0.1"));
    const int port = cfg.value("port", 8080);
    log << "serving on http://" << host << ":" << port << " (GET /model, POST /decode, GET /latent-map, POST /sample)\n";
    log.flush();
    if (!server.listen(host, port)) throw Error("cannot listen on " + host + ":" + std::to_string(port));
    return 0;
}

}  // namespace foilgen::app
