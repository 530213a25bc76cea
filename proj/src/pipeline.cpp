#include "foilgen/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "foilgen/error.hpp"
#include "foilgen/joukowski_inverse.hpp"
#include "foilgen/metrics.hpp"
#include "foilgen/parallel.hpp"
#include "json.hpp"
#include "foilgen/textio.hpp"

namespace foilgen::pipeline {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr std::string_view kShapesMagic = "FOILGEN-SHAPES";

Eigen::RowVectorXd flat_row(const geometry::AirfoilShape& s) {
    const auto f = geometry::flatten(s);
    return Eigen::Map<const Eigen::RowVectorXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

double finite_or_nan(double v) { return std::isfinite(v) ? v : kNaN; }

nlohmann::json json_number(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json histogram_json(const metrics::Histogram& h) {
    return {{"edges", h.edges},
            {"counts", h.counts},
            {"clamped_below", h.below},
            {"clamped_above", h.above},
            {"ignored_nan", h.ignored},
            {"log_scale", h.log_scale}};
}

}  // namespace

vae::Batch to_batch(std::span<const dataset::LabeledAirfoil* const> items) {
    if (items.empty()) throw ParameterError("cannot build a batch from no items");
    const std::size_t n = items.front()->shape.size();
    vae::Batch b;
    b.shapes.resize(static_cast<Eigen::Index>(items.size()), static_cast<Eigen::Index>(2 * n));
    b.labels.resize(static_cast<Eigen::Index>(items.size()));
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (items[i]->shape.size() != n) throw ShapeError("items in a batch must share one point count");
        const auto r = static_cast<Eigen::Index>(i);
        b.shapes.row(r) = flat_row(items[i]->shape);
        b.labels(r) = items[i]->c_l;
    }
    return b;
}

vae::Batch to_batch(const dataset::Dataset& data) {
    std::vector<const dataset::LabeledAirfoil*> ptrs;
    ptrs.reserve(data.items.size());
    for (const auto& it : data.items) ptrs.push_back(&it);
    return to_batch(ptrs);
}

SplitBatches split_batches(const dataset::Dataset& data, const dataset::DatasetSplit& split) {
    return {to_batch(dataset::select(data, split.train)), to_batch(dataset::select(data, split.test))};
}

std::vector<double> label_sweep(double first, double step, std::size_t count) {
    if (count == 0) throw ParameterError("label sweep needs at least one label");
    std::vector<double> v(count);
    // Rounded so 0.016 * 99 prints as 1.584.
    for (std::size_t i = 0; i < count; ++i) v[i] = std::round((first + step * static_cast<double>(i)) * 1e12) / 1e12;
    return v;
}

std::string_view to_string(Sampling s) { return s == Sampling::Random ? "random" : "envelope"; }

Sampling sampling_from_string(std::string_view s) {
    if (s == "random") return Sampling::Random;
    if (s == "envelope") return Sampling::Envelope;
    throw ParameterError("unknown sampling mode '" + std::string(s) + "' (random|envelope)");
}

Matrix encode_means(const vae::CvaeModel& model, const vae::Batch& batch) {
    Matrix out(batch.shapes.rows(), model.config.latent_width());
    parallel_for(static_cast<std::size_t>(batch.shapes.rows()), [&](std::size_t i) {
        const auto r = static_cast<Eigen::Index>(i);
        const Eigen::RowVectorXd s = batch.shapes.row(r);
        out.row(r) = vae::latent_mean(vae::encode(model, {s.data(), static_cast<std::size_t>(s.size())}, batch.labels(r)))
                         .transpose();
    });
    return out;
}

Envelope envelope_of(const Matrix& means) {
    if (means.rows() == 0) throw ParameterError("envelope of an empty set");
    return {means.colwise().minCoeff().transpose(), means.colwise().maxCoeff().transpose()};
}

Matrix sample_latents(const vae::CvaeModel& model, std::size_t count, Sampling sampling, const Envelope* envelope,
                      Rng& rng) {
    const int width = model.config.latent_width();
    Matrix z(static_cast<Eigen::Index>(count), width);
    if (sampling == Sampling::Envelope) {
        if (model.config.kind == vae::LatentKind::Sphere) {
            throw ParameterError("envelope sampling applies to Gaussian-latent models only");
        }
        if (!envelope) throw ParameterError("envelope sampling needs the encoded training set");
        if (envelope->lower.size() != width || envelope->upper.size() != width) {
            throw ParameterError("envelope width does not match the model latent width");
        }
        for (Eigen::Index i = 0; i < z.rows(); ++i) {
            for (int j = 0; j < width; ++j) z(i, j) = rng.uniform(envelope->lower(j), envelope->upper(j));
        }
        return z;
    }
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        for (int j = 0; j < width; ++j) z(i, j) = rng.normal();
        if (model.config.kind == vae::LatentKind::Sphere) {
            double norm = z.row(i).norm();
            while (!(norm > 1e-12)) {
                for (int j = 0; j < width; ++j) z(i, j) = rng.normal();
                norm = z.row(i).norm();
            }
            z.row(i) /= norm;
        }
    }
    return z;
}

std::vector<GeneratedShape> generate(const vae::CvaeModel& model, const Matrix& latents,
                                     std::span<const double> labels) {
    const std::size_t nz = static_cast<std::size_t>(latents.rows());
    std::vector<GeneratedShape> out(nz * labels.size());
    parallel_for(out.size(), [&](std::size_t k) {
        const std::size_t zi = k / labels.size();
        auto& g = out[k];
        g.source = zi;
        g.z = latents.row(static_cast<Eigen::Index>(zi)).transpose();
        g.label = labels[k % labels.size()];
        g.shape = vae::decode(model, g.z, g.label);
    });
    return out;
}

std::vector<GeneratedShape> reconstruct(const vae::CvaeModel& model,
                                        std::span<const dataset::LabeledAirfoil* const> items) {
    std::vector<GeneratedShape> out(items.size());
    parallel_for(items.size(), [&](std::size_t i) {
        const auto flat = geometry::flatten(items[i]->shape);
        auto& g = out[i];
        g.source = items[i]->id;
        g.label = items[i]->c_l;
        g.z = vae::latent_mean(vae::encode(model, flat, g.label));
        g.shape = vae::decode(model, g.z, g.label);
    });
    return out;
}

std::string shapes_to_text(std::span<const GeneratedShape> shapes, std::size_t points) {
    std::string s = std::string(kShapesMagic) + " v1 n=" + std::to_string(points) +
                    " count=" + std::to_string(shapes.size()) + "\n";
    for (const auto& g : shapes) {
        if (g.shape.size() != points) throw ShapeError("generated shape has the wrong point count");
        s += std::to_string(g.source) + "\t" + textio::fmt(g.label) + "\t" +
             textio::join(g.z.data(), static_cast<std::size_t>(g.z.size()), ",");
        for (const auto& p : g.shape.points()) s += "\t" + textio::fmt(p.x);
        for (const auto& p : g.shape.points()) s += "\t" + textio::fmt(p.y);
        s += "\n";
    }
    return textio::seal(std::move(s));
}

std::vector<GeneratedShape> shapes_from_text(std::string_view text, std::size_t expected_points) {
    const auto lines = textio::unseal(text, "shapes file");
    const auto header = textio::split_on(lines.at(0), ' ');
    if (header.size() != 4 || header[0] != kShapesMagic) throw FormatError("not a foilgen shapes file");
    if (header[1] != "v1") throw FormatError("unsupported shapes file version '" + std::string(header[1]) + "'");
    if (header[2].substr(0, 2) != "n=" || header[3].substr(0, 6) != "count=") throw FormatError("bad shapes header");
    const std::size_t n = textio::parse_u64(header[2].substr(2), "point count");
    const std::size_t count = textio::parse_u64(header[3].substr(6), "shape count");
    if (expected_points && n != expected_points) {
        throw FormatError("shapes have " + std::to_string(n) + " points, expected " + std::to_string(expected_points));
    }
    std::vector<GeneratedShape> out;
    out.reserve(count);
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cols = textio::split_on(lines[li], '\t');
        if (cols.size() != 3 + 2 * n) {
            throw FormatError("shape record on line " + std::to_string(li + 1) + " has " +
                              std::to_string(cols.size()) + " fields, expected " + std::to_string(3 + 2 * n));
        }
        GeneratedShape g;
        g.source = textio::parse_u64(cols[0], "source");
        g.label = textio::parse_double(cols[1], "label");
        std::vector<double> z;
        if (!cols[2].empty()) {
            for (auto v : textio::split_on(cols[2], ',')) z.push_back(textio::parse_double(v, "latent component"));
        }
        g.z = Eigen::Map<const Vector>(z.data(), static_cast<Eigen::Index>(z.size()));
        std::vector<geometry::Point2> pts(n);
        for (std::size_t i = 0; i < n; ++i) {
            pts[i].x = textio::parse_double(cols[3 + i], "coordinate");
            pts[i].y = textio::parse_double(cols[3 + n + i], "coordinate");
        }
        g.shape = geometry::AirfoilShape(std::move(pts));
        out.push_back(std::move(g));
    }
    if (out.size() != count) throw FormatError("shapes header count does not match the records");
    return out;
}

void save_shapes(std::span<const GeneratedShape> shapes, std::size_t points, const std::string& path) {
    textio::write_file(path, shapes_to_text(shapes, points));
}

std::vector<GeneratedShape> load_shapes(const std::string& path, std::size_t expected_points) {
    return shapes_from_text(textio::read_file(path), expected_points);
}

ReferenceSets ReferenceSets::from(const dataset::Dataset& data) {
    ReferenceSets r;
    const auto width = static_cast<Eigen::Index>(2 * data.points);
    r.naca.resize(static_cast<Eigen::Index>(data.count(dataset::Family::Naca)), width);
    r.joukowski.resize(static_cast<Eigen::Index>(data.count(dataset::Family::Joukowski)), width);
    Eigen::Index in = 0, ij = 0;
    for (const auto& it : data.items) {
        if (it.family == dataset::Family::Naca) {
            r.naca.row(in++) = flat_row(it.shape);
        } else {
            r.joukowski.row(ij++) = flat_row(it.shape);
        }
    }
    return r;
}

GenerationReport evaluate(std::span<const GeneratedShape> shapes, const ReferenceSets& refs,
                          const EvalOptions& options) {
    options.flow.validate();
    if (shapes.empty()) throw ParameterError("nothing to evaluate");
    if (options.roundness_stride == 0) throw ParameterError("roundness stride must be >= 1");
    const std::size_t n = shapes.front().shape.size();
    for (const auto& g : shapes) {
        if (g.shape.size() != n) throw FormatError("shapes to evaluate differ in point count");
    }
    const auto width = static_cast<Eigen::Index>(2 * n);
    if ((refs.naca.rows() && refs.naca.cols() != width) || (refs.joukowski.rows() && refs.joukowski.cols() != width)) {
        throw FormatError("shape length " + std::to_string(width) + " does not match the reference dataset");
    }

    GenerationReport rep;
    rep.epsilon = options.epsilon;
    rep.rows.resize(shapes.size());
    parallel_for(shapes.size(), [&](std::size_t i) {
        const auto& g = shapes[i];
        auto& row = rep.rows[i];
        row.source = g.source;
        row.label = g.label;
        try {
            row.c_l_recomputed = finite_or_nan(aero::solve_lift(g.shape, options.flow).c_l);
        } catch (const Error&) {
            row.c_l_recomputed = kNaN;
        }
        row.squared_error = (g.label - row.c_l_recomputed) * (g.label - row.c_l_recomputed);
        const auto flat = geometry::flatten(g.shape);
        row.distance_to_naca = refs.naca.rows() ? metrics::distance_to_set(flat, refs.naca) : kNaN;
        row.distance_to_joukowski = refs.joukowski.rows() ? metrics::distance_to_set(flat, refs.joukowski) : kNaN;
        row.w = kNaN;
        if (options.roundness && i % options.roundness_stride == 0) {
            try {
                row.w = jinv::roundness(g.shape).w;
            } catch (const jinv::RoundnessError& e) {
                row.w = e.best().w;
            } catch (const Error&) {
            }
        }
    });

    std::vector<double> labels, recomputed, sq(rep.rows.size());
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        sq[i] = r.squared_error;
        if (std::isnan(r.c_l_recomputed)) {
            ++rep.solver_failures;
            continue;
        }
        labels.push_back(r.label);
        recomputed.push_back(r.c_l_recomputed);
    }
    rep.l_cl = labels.empty() ? kNaN : metrics::cl_error(labels, recomputed);

    auto variation = [&](const std::vector<std::size_t>& idx) {
        if (idx.empty()) return kNaN;
        Matrix m(static_cast<Eigen::Index>(idx.size()), width);
        for (std::size_t k = 0; k < idx.size(); ++k) m.row(static_cast<Eigen::Index>(k)) = flat_row(shapes[idx[k]].shape);
        return metrics::shape_variation(m);
    };
    const auto valid = metrics::filter_valid(sq, options.epsilon);
    rep.valid = valid.size();
    rep.v_valid = variation(valid);

    // Group by source; a source's error is averaged over its successful labels.
    std::map<std::uint64_t, std::pair<double, std::size_t>> per_source;
    std::map<double, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        auto& acc = per_source[rep.rows[i].source];
        if (!std::isnan(sq[i])) {
            acc.first += sq[i];
            ++acc.second;
        }
        by_label[rep.rows[i].label].push_back(i);
    }
    std::map<std::uint64_t, bool> chosen;
    for (const auto& [src, acc] : per_source) {
        const double l = acc.second ? acc.first / static_cast<double>(acc.second) : kNaN;
        rep.sources.push_back(src);
        rep.source_l_cl.push_back(l);
        const bool keep = l < options.epsilon;
        chosen[src] = keep;
        if (keep) rep.selected.push_back(src);
    }
    double v_sum = 0.0;
    std::size_t v_count = 0;
    for (const auto& [label, idx] : by_label) {
        std::vector<std::size_t> picked;
        for (auto i : idx) {
            if (chosen[rep.rows[i].source]) picked.push_back(i);
        }
        const double v = variation(picked);
        rep.labels.push_back(label);
        rep.v_per_label.push_back(v);
        if (!std::isnan(v)) {
            v_sum += v;
            ++v_count;
        }
    }
    rep.mean_v = v_count ? v_sum / static_cast<double>(v_count) : kNaN;

    rep.set_distance = kNaN;
    if (options.set_distance && refs.naca.rows() && refs.joukowski.rows()) {
        rep.set_distance = metrics::set_distance(refs.naca, refs.joukowski);
    }
    return rep;
}

std::vector<LatentMapRow> latent_map(const vae::CvaeModel& model, const dataset::Dataset& data,
                                     std::size_t roundness_stride) {
    if (static_cast<int>(data.points) != model.config.points) {
        throw FormatError("dataset has " + std::to_string(data.points) + " points per shape, model expects " +
                          std::to_string(model.config.points));
    }
    std::vector<LatentMapRow> rows(data.items.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const auto& it = data.items[i];
        auto& r = rows[i];
        r.id = it.id;
        r.c_l = it.c_l;
        r.family = it.family;
        r.z = vae::latent_mean(vae::encode(model, geometry::flatten(it.shape), it.c_l));
        r.w = kNaN;
        if (roundness_stride && i % roundness_stride == 0) {
            try {
                r.w = jinv::roundness(it.shape).w;
            } catch (const jinv::RoundnessError& e) {
                r.w = e.best().w;
            } catch (const Error&) {
            }
        }
    });
    return rows;
}

std::string latent_map_tsv(std::span<const LatentMapRow> rows) {
    std::string s = "id";
    const auto k = rows.empty() ? 0 : rows.front().z.size();
    for (Eigen::Index j = 0; j < k; ++j) s += "\tz" + std::to_string(j + 1);
    s += "\tc_l\tfamily\tw\n";
    for (const auto& r : rows) {
        s += std::to_string(r.id);
        for (Eigen::Index j = 0; j < k; ++j) s += "\t" + textio::fmt(r.z(j));
        s += "\t" + textio::fmt(r.c_l) + "\t" + std::string(dataset::to_string(r.family)) + "\t" +
             (std::isnan(r.w) ? std::string("nan") : textio::fmt(r.w)) + "\n";
    }
    return s;
}

std::string report_tsv(const GenerationReport& report) {
    std::string s = "source\tlabel\tc_l_recomputed\tsquared_error\tdistance_to_naca\tdistance_to_joukowski\tw\n";
    auto num = [](double v) { return std::isnan(v) ? std::string("nan") : textio::fmt(v); };
    for (const auto& r : report.rows) {
        s += std::to_string(r.source) + "\t" + num(r.label) + "\t" + num(r.c_l_recomputed) + "\t" + num(r.squared_error) +
             "\t" + num(r.distance_to_naca) + "\t" + num(r.distance_to_joukowski) + "\t" + num(r.w) + "\n";
    }
    return s;
}

std::string report_summary_json(const GenerationReport& report) {
    std::vector<double> dn, dj, w;
    for (const auto& r : report.rows) {
        dn.push_back(r.distance_to_naca);
        dj.push_back(r.distance_to_joukowski);
        w.push_back(r.w);
    }
    nlohmann::json v_per_label = nlohmann::json::array();
    for (std::size_t i = 0; i < report.labels.size(); ++i) {
        v_per_label.push_back({{"label", report.labels[i]}, {"v", json_number(report.v_per_label[i])}});
    }
    nlohmann::json source_l_cl = nlohmann::json::array();
    for (std::size_t i = 0; i < report.sources.size(); ++i) {
        source_l_cl.push_back({{"source", report.sources[i]}, {"l_cl", json_number(report.source_l_cl[i])}});
    }
    nlohmann::json j = {
        {"count", report.rows.size()},
        {"l_cl", json_number(report.l_cl)},
        {"solver_failures", report.solver_failures},
        {"epsilon", report.epsilon},
        {"valid", report.valid},
        {"v_valid", json_number(report.v_valid)},
        {"selected_sources", report.selected},
        {"source_l_cl", source_l_cl},
        {"v_per_label", v_per_label},
        {"mean_v", json_number(report.mean_v)},
        {"set_distance", json_number(report.set_distance)},
        {"set_distance_definition", metrics::kSetDistanceNote},
        {"roundness_definition", "w = mean squared circle-fit residual of the inverse-mapped contour"},
        {"histograms",
         {{"distance_to_naca", histogram_json(metrics::distance_histogram(dn))},
          {"distance_to_joukowski", histogram_json(metrics::distance_histogram(dj))},
          {"w", histogram_json(metrics::roundness_histogram(w))}}},
    };
    return j.dump(2) + "\n";
}

}  // namespace foilgen::pipeline
