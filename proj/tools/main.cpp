#include <iostream>
#include <map>

#include "CLI11.hpp"
#include "app.hpp"
#include "serve.hpp"

using foilgen::app::Json;

namespace {

struct Command {
    CLI::App* app = nullptr;
    Json cfg = Json::object();
    std::optional<std::uint64_t> seed;
    bool seeded = false;
};

template <class T>
CLI::Option* opt(Command& c, const std::string& flag, const std::string& key, const std::string& help) {
    return c.app->add_option_function<T>(flag, [&c, key](const T& v) { c.cfg[key] = v; }, help);
}

void flag_off(Command& c, const std::string& flag, const std::string& key, const std::string& help) {
    c.app->add_flag_function(flag, [&c, key](std::int64_t) { c.cfg[key] = false; }, help);
}

void seed_opt(Command& c) {
    c.seeded = true;
    c.app->add_option_function<std::uint64_t>("--seed", [&c](const std::uint64_t& v) { c.seed = v; },
                                              "Random seed (falls back to FOILGEN_SEED, then 1)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App cli{"foilgen: airfoil datasets, conditional VAEs and inverse design"};
    cli.require_subcommand(1);
    std::map<std::string, Command> cmds;

    {
        auto& c = cmds["gen-data"];
        c.app = cli.add_subcommand("gen-data", "Build a labelled NACA, Joukowski or mixed dataset");
        opt<std::string>(c, "--family", "family", "naca|joukowski|mixed (default naca)");
        opt<double>(c, "--alpha", "alpha", "Angle of attack in degrees (default 5)");
        opt<std::string>(c, "--out", "out", "Dataset file to write")->required();
        opt<std::size_t>(c, "--points", "points", "Points per outline (default 248)");
        opt<std::string>(c, "--naca-m", "naca_m", "Max camber values, lo:hi:step or a,b,c");
        opt<std::string>(c, "--naca-p", "naca_p", "Camber position values");
        opt<std::string>(c, "--naca-t", "naca_t", "Thickness values");
        opt<std::string>(c, "--jk-a", "jk_a", "Joukowski circle centre, real part");
        opt<std::string>(c, "--jk-b", "jk_b", "Joukowski circle centre, imaginary part");
        opt<double>(c, "--jk-r", "jk_r", "Joukowski circle radius (default 1.1)");
        opt<std::size_t>(c, "--jk-stride", "jk_stride", "Keep every k-th Joukowski candidate (default 5)");
        opt<int>(c, "--dup-joukowski", "dup_joukowski", "Repeat every Joukowski item this many times");
    }
    {
        auto& c = cmds["train"];
        c.app = cli.add_subcommand("train", "Train a conditional VAE and write a checkpoint");
        opt<std::string>(c, "--model", "model", "s-cvae|n-cvae|s-vae|n-vae (default s-cvae)");
        opt<int>(c, "--latent-dim", "latent_dim", "Latent dimension d (default 2)");
        opt<std::string>(c, "--data", "data", "Dataset file")->required();
        opt<std::string>(c, "--out", "out", "Checkpoint file to write")->required();
        opt<std::string>(c, "--trace", "trace", "Loss trace TSV (default <out>.trace.tsv)");
        opt<std::uint64_t>(c, "--split-seed", "split_seed", "Seed of the 9:1 split (default: --seed)");
        opt<int>(c, "--epochs", "epochs", "Epochs (default 500)");
        opt<int>(c, "--batch-size", "batch_size", "Minibatch size (default 64)");
        opt<double>(c, "--lr", "lr", "Adam learning rate (default 1e-3)");
        opt<double>(c, "--kl-weight", "kl_weight", "Weight of the KL term (default 1)");
        opt<std::string>(c, "--hidden", "hidden", "Hidden widths, comma separated (default 500,500)");
        opt<std::string>(c, "--activation", "activation", "Hidden activation (default relu)");
        opt<int>(c, "--log-every", "log_every", "Print the loss every k epochs (default 10)");
        seed_opt(c);
    }
    {
        auto& c = cmds["generate"];
        c.app = cli.add_subcommand("generate", "Decode sampled latent vectors over a label sweep");
        opt<std::string>(c, "--checkpoint", "checkpoint", "Checkpoint file")->required();
        opt<std::string>(c, "--out", "out", "Shapes file to write")->required();
        opt<std::size_t>(c, "--count", "count", "Latent vectors to sample (default 30)");
        opt<std::string>(c, "--labels-sweep,--labels", "labels",
                         "first:step:count or a,b,c (default 0:0.016:100)");
        opt<std::string>(c, "--sampling", "sampling", "random|envelope (default random)");
        opt<std::string>(c, "--data", "data", "Dataset, needed for envelope sampling and --reconstruct");
        opt<std::uint64_t>(c, "--split-seed", "split_seed", "Seed of the 9:1 split (default: --seed)");
        opt<std::string>(c, "--reconstruct", "reconstruct", "train|test|all: decode dataset items instead");
        opt<std::string>(c, "--report", "report", "Also evaluate and write the report TSV here");
        opt<double>(c, "--epsilon", "epsilon", "Label error tolerance for the report (default 0.02)");
        opt<std::size_t>(c, "--roundness-stride", "roundness_stride", "Roundness for every k-th shape, 0 for none");
        seed_opt(c);
    }
    {
        auto& c = cmds["evaluate"];
        c.app = cli.add_subcommand("evaluate", "Recompute lift and shape metrics for a shapes file");
        opt<std::string>(c, "--shapes", "shapes", "Shapes file")->required();
        opt<std::string>(c, "--dataset", "dataset", "Reference dataset for distances");
        opt<std::string>(c, "--out", "out", "Report TSV to write")->required();
        opt<std::string>(c, "--summary", "summary", "Summary JSON (default <out>.summary.json)");
        opt<double>(c, "--epsilon", "epsilon", "Label error tolerance (default 0.02)");
        opt<double>(c, "--alpha", "alpha", "Angle of attack (default: the dataset's, else 5)");
        opt<std::size_t>(c, "--roundness-stride", "roundness_stride", "Roundness for every k-th shape, 0 for none");
        flag_off(c, "--no-set-distance", "set_distance", "Skip the NACA/Joukowski set distance");
    }
    {
        auto& c = cmds["latent-map"];
        c.app = cli.add_subcommand("latent-map", "Encode every dataset item to its posterior mean");
        opt<std::string>(c, "--checkpoint", "checkpoint", "Checkpoint file")->required();
        opt<std::string>(c, "--data", "data", "Dataset file")->required();
        opt<std::string>(c, "--out", "out", "Table to write")->required();
        opt<std::size_t>(c, "--roundness-stride", "roundness_stride", "Roundness for every k-th item, 0 for none");
    }
    {
        auto& c = cmds["serve"];
        c.app = cli.add_subcommand("serve", "Serve the JSON API for interactive exploration");
        opt<std::string>(c, "--checkpoint", "checkpoint", "Checkpoint file")->required();
        opt<std::string>(c, "--dataset", "dataset", "Dataset for /latent-map, envelope sampling and distances");
        opt<int>(c, "--port", "port", "Port (default 8080)");
        opt<std::string>(c, "--host", "host", "Bind address (default 127.0.0.1)");
        opt<double>(c, "--alpha", "alpha", "Angle of attack (default 5)");
        opt<std::size_t>(c, "--roundness-stride", "roundness_stride", "Latent map roundness every k-th item (default 0, none)");
        opt<std::uint64_t>(c, "--split-seed", "split_seed", "Split seed for the envelope (default: --seed)");
        seed_opt(c);
    }
    std::string manifest;
    auto* rerun = cli.add_subcommand("rerun", "Replay a run from its manifest and compare outputs");
    rerun->add_option("--manifest", manifest, "Manifest JSON")->required();

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return cli.exit(e);
    }

    try {
        if (rerun->parsed()) {
            const auto outcome = foilgen::app::rerun(manifest, std::cout);
            for (const auto& p : outcome.identical) std::cout << "identical " << p << "\n";
            for (const auto& p : outcome.changed) std::cout << "CHANGED " << p << "\n";
            return outcome.ok() ? 0 : 3;
        }
        for (auto& [name, c] : cmds) {
            if (!c.app->parsed()) continue;
            if (c.seeded) c.cfg["seed"] = foilgen::app::resolve_seed(c.seed);
            if (name == "serve") return foilgen::app::serve(c.cfg, std::cout);
            const auto path = foilgen::app::run_with_manifest(name, c.cfg, std::cout);
            std::cout << "manifest " << path << "\n";
            return 0;
        }
    } catch (const foilgen::app::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
