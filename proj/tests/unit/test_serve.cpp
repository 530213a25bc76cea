#include <cmath>
#include <filesystem>
#include <sstream>
#include <thread>

#include "app.hpp"
#include "doctest.h"
#include "foilgen/dataset.hpp"
#include "foilgen/pipeline.hpp"
#include "foilgen/textio.hpp"
#include "httplib.h"
#include "serve.hpp"

using namespace foilgen;
using foilgen::app::Json;
namespace fs = std::filesystem;

namespace {

dataset::Dataset small_data() {
    dataset::NacaGrid g;
    g.m_camber = {0.0, 0.02, 0.04};
    g.p_pos = {0.3, 0.5};
    g.t_thick = {0.1, 0.14};
    dataset::JoukowskiGrid j;
    j.a = {0.06, 0.1};
    j.b = {0.02, 0.05};
    j.stride = 1;
    return dataset::merge(dataset::build_naca(g, {}), dataset::build_joukowski(j, {}));
}

vae::CvaeModel trained(vae::LatentKind kind, const dataset::Dataset& data) {
    vae::ModelConfig c;
    c.kind = kind;
    c.hidden = {16, 16};
    nn::TrainConfig tc;
    tc.epochs = 30;
    tc.batch_size = 8;
    const auto b = pipeline::to_batch(data);
    return vae::train(vae::CvaeModel::make(c, 2), b, b, tc).model;
}

// Runs the API on an ephemeral port for the lifetime of the object.
struct Running {
    httplib::Server server;
    std::thread thread;
    int port = 0;
    explicit Running(const app::Service& service) {
        app::mount(server, service);
        port = server.bind_to_any_port("127.0.0.1");
        thread = std::thread([this] { server.listen_after_bind(); });
        server.wait_until_ready();
    }
    ~Running() {
        server.stop();
        thread.join();
    }
    httplib::Client client() const { return httplib::Client("127.0.0.1", port); }
};

std::string zjson(const vae::Vector& z, double c_l) {
    return Json{{"z", std::vector<double>(z.data(), z.data() + z.size())}, {"c_l", c_l}}.dump();
}

}  // namespace

TEST_CASE("sphere model endpoints") {
    const auto data = small_data();
    const auto model = trained(vae::LatentKind::Sphere, data);
    const app::Service service(model, data, {});
    Running run(service);
    auto cli = run.client();

    auto res = cli.Get("/model");
    REQUIRE(res);
    CHECK(res->status == 200);
    const auto info = Json::parse(res->body);
    CHECK(info["kind"] == "sphere");
    CHECK(info["latent_width"] == 3);

    // Autoencoding path: decoding an item's mean latent at its label gives its reconstruction.
    const auto& item = data.items[3];
    const vae::Vector z = vae::latent_mean(vae::encode(model, geometry::flatten(item.shape), item.c_l));
    res = cli.Post("/decode", zjson(z, item.c_l), "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto dec = Json::parse(res->body);
    const auto expect = vae::decode(model, z, item.c_l);
    const auto xs = dec["shape"]["x"].get<std::vector<double>>();
    const auto ys = dec["shape"]["y"].get<std::vector<double>>();
    REQUIRE(xs.size() == expect.size());
    double sq = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(xs[i] == expect.points()[i].x);
        CHECK(ys[i] == expect.points()[i].y);
        sq += std::pow(xs[i] - item.shape.points()[i].x, 2) + std::pow(ys[i] - item.shape.points()[i].y, 2);
    }
    const double rec = vae::loss(model, pipeline::to_batch(std::vector<const dataset::LabeledAirfoil*>{&item}), nullptr, 0.0).rec;
    // The response closes the trailing edge, so it can only move closer to the target.
    CHECK(sq > 0.0);
    CHECK(sq <= rec * (1 + 1e-12));
    CHECK(dec["c_l"] == item.c_l);
    CHECK(dec["w"].is_number());
    CHECK(dec["distance_to_naca"].is_number());

    // Norm guard.
    res = cli.Post("/decode", zjson(0.9 * z, 0.5), "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    const auto err = Json::parse(res->body);
    CHECK(err["error"] == "latent_norm");
    CHECK(err["norm"].get<double>() == doctest::Approx(0.9));

    res = cli.Post("/decode", "{\"z\": [1, 0]", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);
    res = cli.Post("/decode", zjson(vae::Vector::Ones(2), 0.5), "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);

    res = cli.Post("/sample", R"({"count": 30, "sampling": "random", "seed": 3})", "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto samples = Json::parse(res->body);
    CHECK(samples["latents"].size() == 30);
    for (const auto& row : samples["latents"]) {
        const auto v = row.get<std::vector<double>>();
        CHECK(std::abs(std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]) - 1.0) < 1e-12);
    }
    // Pure in the request.
    auto again = cli.Post("/sample", R"({"count": 30, "sampling": "random", "seed": 3})", "application/json");
    REQUIRE(again);
    CHECK(again->body == res->body);
    res = cli.Post("/sample", R"({"count": 0})", "application/json");
    REQUIRE(res);
    CHECK(Json::parse(res->body)["latents"].empty());
    res = cli.Post("/sample", R"({"count": 5, "sampling": "envelope"})", "application/json");
    REQUIRE(res);
    CHECK(res->status == 422);
    CHECK(Json::parse(res->body)["error"] == "sampling_mode");

    res = cli.Get("/latent-map");
    REQUIRE(res);
    const auto map = Json::parse(res->body);
    CHECK(map["rows"].size() == data.items.size());
    CHECK(map["rows"][0]["family"] == "naca");
}

TEST_CASE("gauss model envelope sampling and missing dataset") {
    const auto data = small_data();
    const auto model = trained(vae::LatentKind::Gauss, data);
    const app::Service with(model, data, {});
    Running run(with);
    auto cli = run.client();
    auto res = cli.Post("/sample", R"({"count": 50, "sampling": "envelope"})", "application/json");
    REQUIRE(res);
    REQUIRE(res->status == 200);
    const auto env = Json::parse(cli.Get("/model")->body)["envelope"];
    for (const auto& row : Json::parse(res->body)["latents"]) {
        for (int j = 0; j < 2; ++j) {
            CHECK(row[j].get<double>() >= env["lower"][j].get<double>());
            CHECK(row[j].get<double>() <= env["upper"][j].get<double>());
        }
    }

    const app::Service bare(model, std::nullopt, {});
    CHECK(bare.latent_map().status == 404);
    CHECK(bare.sample(R"({"sampling": "envelope"})").status == 422);
    CHECK(bare.sample("[1]").status == 400);
    CHECK(bare.sample(R"({"count": -1})").status == 400);
}

TEST_CASE("decode agrees with the evaluate command bit for bit") {
    const auto dir = fs::temp_directory_path() / "foilgen_serve_consistency";
    fs::create_directories(dir);
    const auto data = small_data();
    const auto model = trained(vae::LatentKind::Sphere, data);
    vae::save_checkpoint(model, (dir / "m.json").string());
    std::ostringstream log;
    app::generate({{"checkpoint", (dir / "m.json").string()},
                   {"out", (dir / "g.txt").string()},
                   {"count", 5},
                   {"labels", "0.25,0.75"},
                   {"seed", 11}},
                  log);
    app::evaluate({{"shapes", (dir / "g.txt").string()}, {"out", (dir / "r.tsv").string()}, {"roundness_stride", 0}}, log);
    const auto shapes = pipeline::load_shapes((dir / "g.txt").string());
    const auto lines = textio::split_on(textio::read_file((dir / "r.tsv").string()), '\n');

    const app::Service service(model, std::nullopt, {});
    for (std::size_t i = 0; i < shapes.size(); ++i) {
        const auto reply = service.decode(zjson(shapes[i].z, shapes[i].label));
        REQUIRE(reply.status == 200);
        const auto cols = textio::split_on(lines[i + 1], '\t');
        const double cli_cl = textio::parse_double(cols[2], "c_l");
        CHECK(reply.body["c_l_recomputed"].get<double>() == cli_cl);
        CHECK(reply.body["error"].get<double>() == textio::parse_double(cols[3], "error"));
    }
    fs::remove_all(dir);
}
