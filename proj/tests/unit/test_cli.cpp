#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "app.hpp"
#include "doctest.h"
#include "foilgen/dataset.hpp"
#include "foilgen/pipeline.hpp"
#include "foilgen/textio.hpp"
#include "foilgen/vae.hpp"

using namespace foilgen;
using foilgen::app::Json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("foilgen_cli_" + std::to_string(std::rand()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string operator/(const std::string& name) const { return (path / name).string(); }
};

Json small_grid(const std::string& out, const std::string& family = "mixed") {
    return {{"family", family},
            {"out", out},
            {"naca_m", "0,0.02,0.04"},
            {"naca_p", "0.3,0.5"},
            {"naca_t", "0.1,0.14"},
            {"jk_a", "0.06:0.12:0.02"},
            {"jk_b", "0.02:0.06:0.02"},
            {"jk_stride", 1}};
}

Json quick_train(const std::string& data, const std::string& out, const std::string& model) {
    return {{"model", model}, {"data", data}, {"out", out}, {"epochs", 3}, {"hidden", "8,8"}, {"seed", 5}};
}

std::string slurp(const std::string& p) { return textio::read_file(p); }

}  // namespace

TEST_CASE("gen-data") {
    TempDir dir;
    std::ostringstream log;
    const auto r = app::gen_data(small_grid(dir / "d.txt", "naca"), log);
    const auto d = dataset::load(dir / "d.txt");
    CHECK(d.items.size() == 10);
    CHECK(slurp(dir / "d.txt").find("count=10") != std::string::npos);
    CHECK(log.str().find("items 10") != std::string::npos);
    CHECK(r.config.at("alpha") == 5.0);

    auto mixed = small_grid(dir / "m.txt");
    const auto base = (app::gen_data(mixed, log), dataset::load(dir / "m.txt"));
    mixed["dup_joukowski"] = 3;
    app::gen_data(mixed, log);
    const auto tripled = dataset::load(dir / "m.txt");
    CHECK(tripled.count(dataset::Family::Joukowski) == 3 * base.count(dataset::Family::Joukowski));
    CHECK(tripled.count(dataset::Family::Naca) == base.count(dataset::Family::Naca));

    CHECK_THROWS_AS(app::gen_data({{"family", "naca"}}, log), app::UsageError);
    CHECK_THROWS_AS(app::gen_data({{"out", dir / "x"}, {"family", "clark"}}, log), app::UsageError);
    CHECK_THROWS_AS(app::gen_data({{"out", dir / "x"}, {"bogus", 1}}, log), app::UsageError);
}

TEST_CASE("train model tags") {
    TempDir dir;
    std::ostringstream log;
    app::gen_data(small_grid(dir / "d.txt"), log);
    app::train(quick_train(dir / "d.txt", dir / "s.json", "s-cvae"), log);
    const auto s = vae::load_checkpoint(dir / "s.json");
    CHECK(s.config.kind == vae::LatentKind::Sphere);
    CHECK(s.config.latent_dim == 2);
    CHECK(s.config.use_label);
    CHECK(fs::exists(dir / "s.json.trace.tsv"));

    app::train(quick_train(dir / "d.txt", dir / "n.json", "n-vae"), log);
    const auto n = vae::load_checkpoint(dir / "n.json");
    CHECK(n.config.kind == vae::LatentKind::Gauss);
    CHECK_FALSE(n.config.use_label);

    CHECK_THROWS_AS(app::train(quick_train(dir / "d.txt", dir / "q.json", "q-cvae"), log), app::UsageError);
}

TEST_CASE("generate, evaluate and latent-map") {
    TempDir dir;
    std::ostringstream log;
    app::gen_data(small_grid(dir / "d.txt"), log);
    app::train(quick_train(dir / "d.txt", dir / "s.json", "s-cvae"), log);
    app::train(quick_train(dir / "d.txt", dir / "n.json", "n-cvae"), log);

    app::generate({{"checkpoint", dir / "s.json"}, {"out", dir / "g.txt"}, {"count", 4}}, log);
    const auto g = pipeline::load_shapes(dir / "g.txt");
    CHECK(g.size() == 400);  // default sweep of 100 labels
    CHECK(g[99].label == 1.584);
    for (const auto& s : g) CHECK(std::abs(s.z.norm() - 1.0) < 1e-12);

    CHECK_THROWS_AS(app::generate({{"checkpoint", dir / "n.json"}, {"out", dir / "e.txt"}, {"sampling", "envelope"}}, log),
                    app::UsageError);
    CHECK_THROWS_AS(app::generate({{"checkpoint", dir / "s.json"},
                                   {"out", dir / "e.txt"},
                                   {"sampling", "envelope"},
                                   {"data", dir / "d.txt"}},
                                  log),
                    app::UsageError);
    app::generate({{"checkpoint", dir / "n.json"},
                   {"out", dir / "e.txt"},
                   {"sampling", "envelope"},
                   {"data", dir / "d.txt"},
                   {"count", 2},
                   {"labels", "0.5,0.9"}},
                  log);
    CHECK(pipeline::load_shapes(dir / "e.txt").size() == 4);

    app::generate({{"checkpoint", dir / "n.json"}, {"out", dir / "rec.txt"}, {"reconstruct", "test"}, {"data", dir / "d.txt"}},
                  log);
    const auto data = dataset::load(dir / "d.txt");
    CHECK(pipeline::load_shapes(dir / "rec.txt").size() == dataset::split(data, 5).test.size());

    app::evaluate({{"shapes", dir / "e.txt"}, {"dataset", dir / "d.txt"}, {"out", dir / "r.tsv"}, {"epsilon", 1e9}}, log);
    const auto summary = Json::parse(slurp(dir / "r.tsv.summary.json"));
    CHECK(summary.at("valid") == 4);
    CHECK(summary.at("count") == 4);
    CHECK(summary.at("set_distance").is_number());

    // A 128-point dataset cannot serve as reference for 248-point shapes.
    auto other = small_grid(dir / "d128.txt");
    other["points"] = 128;
    app::gen_data(other, log);
    CHECK_THROWS_AS(app::evaluate({{"shapes", dir / "e.txt"}, {"dataset", dir / "d128.txt"}, {"out", dir / "x.tsv"}}, log),
                    FormatError);

    app::latent_map({{"checkpoint", dir / "s.json"}, {"data", dir / "d.txt"}, {"out", dir / "lm.tsv"}, {"roundness_stride", 0}},
                    log);
    const auto lm = slurp(dir / "lm.tsv");
    CHECK(std::count(lm.begin(), lm.end(), '\n') == static_cast<long>(data.items.size() + 1));
    const auto lines = textio::split_on(lm, '\n');
    for (std::size_t i = 1; i + 1 < lines.size(); ++i) {
        const auto cols = textio::split_on(lines[i], '\t');
        double sq = 0.0;
        for (int j = 1; j <= 3; ++j) sq += std::pow(textio::parse_double(cols[j], "z"), 2);
        CHECK(std::abs(std::sqrt(sq) - 1.0) < 1e-9);
    }
}

TEST_CASE("every command replays bit-identically from its manifest") {
    TempDir dir;
    std::ostringstream log;
    const auto cwd = fs::current_path();
    fs::current_path(dir.path);
    std::vector<std::string> manifests;
    manifests.push_back(app::run_with_manifest("gen-data", small_grid("d.txt"), log));
    manifests.push_back(app::run_with_manifest("train", quick_train("d.txt", "s.json", "s-cvae"), log));
    manifests.push_back(app::run_with_manifest(
        "generate", {{"checkpoint", "s.json"}, {"out", "g.txt"}, {"count", 2}, {"labels", "0.3,0.8"}, {"seed", 9}}, log));
    manifests.push_back(app::run_with_manifest("evaluate", {{"shapes", "g.txt"}, {"dataset", "d.txt"}, {"out", "r.tsv"}}, log));
    manifests.push_back(
        app::run_with_manifest("latent-map", {{"checkpoint", "s.json"}, {"data", "d.txt"}, {"out", "lm.tsv"}}, log));
    fs::current_path(cwd);

    for (const auto& m : manifests) {
        const auto outcome = app::rerun((dir.path / m).string(), log);
        CHECK_MESSAGE(outcome.ok(), m);
        CHECK(!outcome.identical.empty());
    }

    // A changed output is reported.
    const auto manifest_path = (dir.path / manifests[2]).string();
    auto m = Json::parse(slurp(manifest_path));
    m["config"]["seed"] = 10;
    textio::write_file(manifest_path, m.dump());
    CHECK_FALSE(app::rerun(manifest_path, log).ok());
}

TEST_CASE("seed fallback and value parsing") {
    CHECK(app::resolve_seed(7) == 7);
    setenv("FOILGEN_SEED", "42", 1);
    CHECK(app::resolve_seed(std::nullopt) == 42);
    setenv("FOILGEN_SEED", "abc", 1);
    CHECK_THROWS_AS(app::resolve_seed(std::nullopt), app::UsageError);
    unsetenv("FOILGEN_SEED");
    CHECK(app::resolve_seed(std::nullopt) == 1);

    CHECK(app::parse_values("0:0.1:0.05") == std::vector<double>{0.0, 0.05, 0.1});
    CHECK(app::parse_values("0.3,0.7") == std::vector<double>{0.3, 0.7});
    CHECK_THROWS_AS(app::parse_values("a,b"), app::UsageError);
}
