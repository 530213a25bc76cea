#include "app.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <numeric>

#include "foilgen/dataset.hpp"
#include "foilgen/metrics.hpp"
#include "foilgen/pipeline.hpp"
#include "foilgen/textio.hpp"
#include "foilgen/vae.hpp"

namespace foilgen::app {

namespace {

constexpr int kManifestVersion = 1;

// Defaults first, then the caller's flags on top.
Json resolve(Json defaults, const Json& given) {
    for (const auto& [k, v] : given.items()) {
        if (!defaults.contains(k)) throw UsageError("unknown option '" + k + "'");
        defaults[k] = v;
    }
    return defaults;
}

std::string require_path(const Json& c, const char* key, const char* flag) {
    const auto p = c.at(key).get<std::string>();
    if (p.empty()) throw UsageError(std::string("missing required option ") + flag);
    return p;
}

std::uint64_t seed_of(const Json& c) { return c.at("seed").get<std::uint64_t>(); }

std::string checksum_of(const std::string& path) { return textio::crc32_hex(textio::read_file(path)); }

struct ModelTag {
    vae::LatentKind kind;
    bool use_label;
};

ModelTag parse_model_tag(const std::string& tag) {
    if (tag == "s-cvae") return {vae::LatentKind::Sphere, true};
    if (tag == "n-cvae") return {vae::LatentKind::Gauss, true};
    if (tag == "s-vae") return {vae::LatentKind::Sphere, false};
    if (tag == "n-vae") return {vae::LatentKind::Gauss, false};
    throw UsageError("unknown model '" + tag + "' (s-cvae|n-cvae|s-vae|n-vae)");
}

std::vector<int> parse_hidden(const std::string& spec) {
    std::vector<int> out;
    for (auto part : textio::split_on(spec, ',')) {
        const auto v = textio::parse_u64(part, "hidden layer width");
        if (v == 0) throw UsageError("hidden layer widths must be positive");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

// "first:step:count" or an explicit comma list.
std::vector<double> parse_labels(const std::string& spec) {
    const auto parts = textio::split_on(spec, ':');
    if (parts.size() == 3) {
        return pipeline::label_sweep(textio::parse_double(parts[0], "label"), textio::parse_double(parts[1], "label step"),
                                     textio::parse_u64(parts[2], "label count"));
    }
    return parse_values(spec);
}

dataset::DatasetSplit split_for(const dataset::Dataset& data, const Json& c) {
    return dataset::split(data, c.at("split_seed").is_null() ? seed_of(c) : c.at("split_seed").get<std::uint64_t>());
}

std::string fixed(double v, int digits = 6) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

}  // namespace

std::uint64_t resolve_seed(std::optional<std::uint64_t> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("FOILGEN_SEED"); env && *env) {
        try {
            return textio::parse_u64(env, "FOILGEN_SEED");
        } catch (const FormatError&) {
            throw UsageError(std::string("FOILGEN_SEED is not an unsigned integer: '") + env + "'");
        }
    }
    return 1;
}

std::vector<double> parse_values(const std::string& spec) {
    try {
        const auto parts = textio::split_on(spec, ':');
        if (parts.size() == 3) {
            return dataset::grid_range(textio::parse_double(parts[0], "grid start"),
                                       textio::parse_double(parts[1], "grid end"),
                                       textio::parse_double(parts[2], "grid step"));
        }
        std::vector<double> v;
        for (auto p : textio::split_on(spec, ',')) v.push_back(textio::parse_double(p, "value"));
        return v;
    } catch (const FormatError& e) {
        throw UsageError(e.what());
    }
}

RunResult gen_data(const Json& cfg, std::ostream& log) {
    const Json c = resolve({{"family", "naca"},
                            {"alpha", 5.0},
                            {"points", geometry::kDefaultPoints},
                            {"out", ""},
                            {"naca_m", "0:0.09:0.005"},
                            {"naca_p", "0.2:0.7:0.05"},
                            {"naca_t", "0.06:0.24:0.01"},
                            {"jk_a", "0:0.2:0.002"},
                            {"jk_b", "0:0.2:0.001"},
                            {"jk_r", 1.1},
                            {"jk_stride", 5},
                            {"dup_joukowski", 1}},
                           cfg);
    const auto out = require_path(c, "out", "--out");
    const auto family = c.at("family").get<std::string>();
    if (family != "naca" && family != "joukowski" && family != "mixed") {
        throw UsageError("unknown family '" + family + "' (naca|joukowski|mixed)");
    }
    const int dup = c.at("dup_joukowski").get<int>();
    if (dup < 1) throw UsageError("--dup-joukowski must be >= 1");
    aero::FlowCondition flow{c.at("alpha").get<double>()};
    const auto points = c.at("points").get<std::size_t>();

    dataset::BuildReport report;
    dataset::Dataset data;
    data.points = points;
    data.flow = flow;
    if (family != "joukowski") {
        dataset::NacaGrid g{parse_values(c.at("naca_m")), parse_values(c.at("naca_p")), parse_values(c.at("naca_t"))};
        data = dataset::build_naca(g, flow, points, &report);
    }
    if (family != "naca") {
        dataset::JoukowskiGrid g;
        g.a = parse_values(c.at("jk_a"));
        g.b = parse_values(c.at("jk_b"));
        g.r = c.at("jk_r").get<double>();
        g.stride = c.at("jk_stride").get<std::size_t>();
        auto j = dataset::build_joukowski(g, flow, points, &report);
        data = family == "mixed" ? dataset::merge(data, j) : std::move(j);
    }
    if (dup > 1) data = dataset::duplicate_family(data, dataset::Family::Joukowski, dup);
    data.meta["excluded"] = std::to_string(report.excluded.size());
    dataset::save(data, out);

    const std::string excluded_path = out + ".excluded.tsv";
    std::string ex = "what\treason\n";
    for (const auto& e : report.excluded) ex += e.what + "\t" + e.reason + "\n";
    textio::write_file(excluded_path, ex);

    std::vector<double> labels;
    for (const auto& it : data.items) labels.push_back(it.c_l);
    const double mean = std::accumulate(labels.begin(), labels.end(), 0.0) / static_cast<double>(labels.size());
    double var = 0.0;
    for (double l : labels) var += (l - mean) * (l - mean);
    const double sd = std::sqrt(var / static_cast<double>(labels.size()));
    log << "candidates " << report.candidates << ", excluded " << report.excluded.size() << ", items "
        << data.items.size() << " (naca " << data.count(dataset::Family::Naca) << ", joukowski "
        << data.count(dataset::Family::Joukowski) << ")\n";
    if (family == "naca") log << "reference NACA set size: 3696\n";
    log << "c_l mean " << fixed(mean) << ", std " << fixed(sd) << " (reference NACA set: mean 0.6866, std 0.3848)\n";
    return {c, {}, {out, excluded_path}};
}

RunResult train(const Json& cfg, std::ostream& log) {
    const Json c = resolve({{"model", "s-cvae"},
                            {"latent_dim", 2},
                            {"data", ""},
                            {"out", ""},
                            {"trace", ""},
                            {"seed", 1},
                            {"split_seed", nullptr},
                            {"epochs", 500},
                            {"batch_size", 64},
                            {"lr", 1e-3},
                            {"kl_weight", 1.0},
                            {"hidden", "500,500"},
                            {"activation", "relu"},
                            {"log_every", 10}},
                           cfg);
    const auto data_path = require_path(c, "data", "--data");
    const auto out = require_path(c, "out", "--out");
    const std::string trace_path = c.at("trace").get<std::string>().empty() ? out + ".trace.tsv" : c.at("trace").get<std::string>();
    const auto tag = parse_model_tag(c.at("model"));

    const auto data = dataset::load(data_path);
    vae::ModelConfig mc;
    mc.kind = tag.kind;
    mc.use_label = tag.use_label;
    mc.latent_dim = c.at("latent_dim").get<int>();
    mc.points = static_cast<int>(data.points);
    mc.hidden = parse_hidden(c.at("hidden"));
    mc.hidden_activation = nn::activation_from_string(c.at("activation").get<std::string>());
    const auto seed = seed_of(c);
    const auto model = vae::CvaeModel::make(mc, seed);

    nn::TrainConfig tc;
    tc.epochs = c.at("epochs").get<int>();
    tc.batch_size = c.at("batch_size").get<int>();
    tc.adam.learning_rate = c.at("lr").get<double>();
    tc.kl_weight = c.at("kl_weight").get<double>();
    tc.seed = seed;

    const auto split = split_for(data, c);
    const auto batches = pipeline::split_batches(data, split);
    const int every = std::max(1, c.at("log_every").get<int>());
    log << "training " << c.at("model").get<std::string>() << " d=" << mc.latent_dim << " on " << split.train.size()
        << " items (" << split.test.size() << " held out)\n";
    const auto result = vae::train(model, batches.train, batches.test, tc, [&](int epoch, const vae::TrainResult& r) {
        if ((epoch + 1) % every == 0 || epoch + 1 == tc.epochs) {
            const auto& t = r.trace.train.back();
            const auto& v = r.trace.test.back();
            log << "epoch " << epoch + 1 << " train total " << fixed(t.total) << " rec " << fixed(t.rec) << " kl "
                << fixed(t.kl) << " | test rec " << fixed(v.rec) << "\n";
        }
    });
    vae::save_checkpoint(result.model, out);

    std::string tr = "epoch\ttrain_total\ttrain_rec\ttrain_kl\ttest_total\ttest_rec\ttest_kl\n";
    for (std::size_t e = 0; e < result.trace.train.size(); ++e) {
        const auto& t = result.trace.train[e];
        const auto& v = result.trace.test[e];
        tr += std::to_string(e + 1) + "\t" + textio::fmt(t.total) + "\t" + textio::fmt(t.rec) + "\t" + textio::fmt(t.kl) +
              "\t" + textio::fmt(v.total) + "\t" + textio::fmt(v.rec) + "\t" + textio::fmt(v.kl) + "\n";
    }
    textio::write_file(trace_path, tr);
    Json resolved = c;
    resolved["trace"] = trace_path;
    return {resolved, {data_path}, {out, trace_path}};
}

RunResult evaluate(const Json& cfg, std::ostream& log) {
    const Json c = resolve({{"shapes", ""},
                            {"dataset", ""},
                            {"out", ""},
                            {"summary", ""},
                            {"epsilon", metrics::kDefaultEpsilon},
                            {"alpha", nullptr},
                            {"roundness_stride", 1},
                            {"set_distance", true}},
                           cfg);
    const auto shapes_path = require_path(c, "shapes", "--shapes");
    const auto out = require_path(c, "out", "--out");
    const auto data_path = c.at("dataset").get<std::string>();
    const std::string summary =
        c.at("summary").get<std::string>().empty() ? out + ".summary.json" : c.at("summary").get<std::string>();

    std::optional<dataset::Dataset> data;
    if (!data_path.empty()) data = dataset::load(data_path);
    const auto shapes = pipeline::load_shapes(shapes_path, data ? data->points : 0);

    pipeline::EvalOptions opt;
    opt.epsilon = c.at("epsilon").get<double>();
    opt.flow.alpha_deg = c.at("alpha").is_null() ? (data ? data->flow.alpha_deg : aero::FlowCondition{}.alpha_deg)
                                                 : c.at("alpha").get<double>();
    const auto stride = c.at("roundness_stride").get<std::size_t>();
    opt.roundness = stride > 0;
    opt.roundness_stride = std::max<std::size_t>(1, stride);
    opt.set_distance = c.at("set_distance").get<bool>();
    const auto refs = data ? pipeline::ReferenceSets::from(*data) : pipeline::ReferenceSets{};
    const auto rep = pipeline::evaluate(shapes, refs, opt);
    textio::write_file(out, pipeline::report_tsv(rep));
    textio::write_file(summary, pipeline::report_summary_json(rep));

    log << "shapes " << rep.rows.size() << ", solver failures " << rep.solver_failures << "\n";
    log << "L_CL " << fixed(rep.l_cl) << ", |G| " << rep.valid << " (epsilon " << opt.epsilon << ")";
    log << ", v(G) " << fixed(rep.v_valid) << "\n";
    log << "sources with mean error < epsilon: " << rep.selected.size() << " of " << rep.sources.size()
        << ", mean v over labels " << fixed(rep.mean_v) << "\n";
    if (!std::isnan(rep.set_distance)) {
        log << "set distance " << fixed(rep.set_distance) << " (" << metrics::kSetDistanceNote << ")\n";
    }
    Json resolved = c;
    resolved["summary"] = summary;
    resolved["alpha"] = opt.flow.alpha_deg;
    std::vector<std::string> inputs{shapes_path};
    if (!data_path.empty()) inputs.push_back(data_path);
    return {resolved, inputs, {out, summary}};
}

RunResult generate(const Json& cfg, std::ostream& log) {
    const Json c = resolve({{"checkpoint", ""},
                            {"out", ""},
                            {"count", 30},
                            {"labels", "0:0.016:100"},
                            {"sampling", "random"},
                            {"data", ""},
                            {"split_seed", nullptr},
                            {"reconstruct", ""},
                            {"seed", 1},
                            {"report", ""},
                            {"epsilon", metrics::kDefaultEpsilon},
                            {"roundness_stride", 1}},
                           cfg);
    const auto ckpt = require_path(c, "checkpoint", "--checkpoint");
    const auto out = require_path(c, "out", "--out");
    const auto model = vae::load_checkpoint(ckpt);
    const auto data_path = c.at("data").get<std::string>();
    const auto recon = c.at("reconstruct").get<std::string>();
    std::vector<std::string> inputs{ckpt};
    std::optional<dataset::Dataset> data;
    if (!data_path.empty()) {
        data = dataset::load(data_path);
        inputs.push_back(data_path);
    }

    std::vector<pipeline::GeneratedShape> shapes;
    if (!recon.empty()) {
        if (!data) throw UsageError("--reconstruct needs --data");
        std::vector<const dataset::LabeledAirfoil*> items;
        if (recon == "all") {
            for (const auto& it : data->items) items.push_back(&it);
        } else if (recon == "train" || recon == "test") {
            const auto split = split_for(*data, c);
            items = dataset::select(*data, recon == "train" ? split.train : split.test);
        } else {
            throw UsageError("--reconstruct takes train|test|all");
        }
        shapes = pipeline::reconstruct(model, items);
        log << "reconstructed " << shapes.size() << " " << recon << " items\n";
    } else {
        const auto sampling = [&] {
            try {
                return pipeline::sampling_from_string(c.at("sampling").get<std::string>());
            } catch (const ParameterError& e) {
                throw UsageError(e.what());
            }
        }();
        std::optional<pipeline::Envelope> env;
        if (sampling == pipeline::Sampling::Envelope) {
            if (model.config.kind == vae::LatentKind::Sphere) {
                throw UsageError("envelope sampling applies to Gaussian-latent models only");
            }
            if (!data) throw UsageError("envelope sampling needs --data to encode the training set");
            const auto split = split_for(*data, c);
            env = pipeline::envelope_of(pipeline::encode_means(model, pipeline::to_batch(dataset::select(*data, split.train))));
        }
        Rng rng(seed_of(c));
        const auto z = pipeline::sample_latents(model, c.at("count").get<std::size_t>(), sampling, env ? &*env : nullptr, rng);
        const auto labels = parse_labels(c.at("labels"));
        shapes = pipeline::generate(model, z, labels);
        log << "generated " << shapes.size() << " shapes (" << z.rows() << " latent vectors x " << labels.size()
            << " labels, " << pipeline::to_string(sampling) << " sampling)\n";
    }
    pipeline::save_shapes(shapes, static_cast<std::size_t>(model.config.points), out);
    RunResult res{c, inputs, {out}};

    if (const auto report = c.at("report").get<std::string>(); !report.empty()) {
        Json ec = {{"shapes", out},
                   {"out", report},
                   {"dataset", data_path},
                   {"epsilon", c.at("epsilon")},
                   {"roundness_stride", c.at("roundness_stride")}};
        const auto er = evaluate(ec, log);
        res.outputs.insert(res.outputs.end(), er.outputs.begin(), er.outputs.end());
    }
    return res;
}

RunResult latent_map(const Json& cfg, std::ostream& log) {
    const Json c = resolve({{"checkpoint", ""}, {"data", ""}, {"out", ""}, {"roundness_stride", 1}}, cfg);
    const auto ckpt = require_path(c, "checkpoint", "--checkpoint");
    const auto data_path = require_path(c, "data", "--data");
    const auto out = require_path(c, "out", "--out");
    const auto model = vae::load_checkpoint(ckpt);
    const auto data = dataset::load(data_path);
    const auto rows = pipeline::latent_map(model, data, c.at("roundness_stride").get<std::size_t>());
    textio::write_file(out, pipeline::latent_map_tsv(rows));

    std::size_t near_origin = 0;
    for (const auto& r : rows) near_origin += r.z.norm() < 0.05;
    log << "mapped " << rows.size() << " items into a " << model.config.latent_width() << "-wide latent space";
    if (model.config.kind == vae::LatentKind::Gauss) log << "; |z| < 0.05 for " << near_origin << " of them";
    log << "\n";
    return {c, {ckpt, data_path}, {out}};
}

RunResult run(const std::string& command, const Json& cfg, std::ostream& log) {
    if (command == "gen-data") return gen_data(cfg, log);
    if (command == "train") return train(cfg, log);
    if (command == "generate") return generate(cfg, log);
    if (command == "evaluate") return evaluate(cfg, log);
    if (command == "latent-map") return latent_map(cfg, log);
    throw UsageError("unknown command '" + command + "'");
}

std::string manifest_path_for(const RunResult& result) { return result.outputs.at(0) + ".manifest.json"; }

Json make_manifest(const std::string& command, const RunResult& result, double seconds) {
    Json in = Json::object(), out = Json::object();
    for (const auto& p : result.inputs) in[p] = checksum_of(p);
    for (const auto& p : result.outputs) out[p] = checksum_of(p);
    Json seeds = Json::object();
    for (const char* k : {"seed", "split_seed"}) {
        if (result.config.contains(k)) seeds[k] = result.config.at(k);
    }
    return {{"format", "foilgen-manifest"},
            {"version", kManifestVersion},
            {"command", command},
            {"config", result.config},
            {"seeds", seeds},
            {"working_directory", std::filesystem::current_path().string()},
            {"inputs", in},
            {"outputs", out},
            {"checksum", "crc32"},
            {"wall_clock_seconds", seconds}};
}

std::string run_with_manifest(const std::string& command, const Json& cfg, std::ostream& log) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto res = run(command, cfg, log);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const auto path = manifest_path_for(res);
    textio::write_file(path, make_manifest(command, res, secs).dump(2) + "\n");
    return path;
}

RerunOutcome rerun(const std::string& manifest_path, std::ostream& log) {
    Json m;
    try {
        m = Json::parse(textio::read_file(manifest_path));
    } catch (const Json::exception& e) {
        throw FormatError("manifest " + manifest_path + " is not valid JSON: " + e.what());
    }
    if (m.value("format", "") != "foilgen-manifest") throw FormatError(manifest_path + " is not a foilgen manifest");
    if (m.value("version", 0) != kManifestVersion) throw FormatError("unsupported manifest version");
    const auto cwd = std::filesystem::current_path();
    std::filesystem::current_path(m.at("working_directory").get<std::string>());
    RerunOutcome outcome;
    try {
        for (const auto& [path, crc] : m.at("inputs").items()) {
            if (checksum_of(path) != crc.get<std::string>()) log << "warning: input " << path << " changed since the run\n";
        }
        run(m.at("command").get<std::string>(), m.at("config"), log);
        for (const auto& [path, crc] : m.at("outputs").items()) {
            (checksum_of(path) == crc.get<std::string>() ? outcome.identical : outcome.changed).push_back(path);
        }
    } catch (...) {
        std::filesystem::current_path(cwd);
        throw;
    }
    std::filesystem::current_path(cwd);
    return outcome;
}

}  // namespace foilgen::app
