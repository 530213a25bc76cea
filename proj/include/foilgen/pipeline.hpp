#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "foilgen/aero.hpp"
#include "foilgen/dataset.hpp"
#include "foilgen/vae.hpp"

// Glue between datasets, trained models and the evaluation metrics.
namespace foilgen::pipeline {

using vae::Matrix;
using vae::Vector;

vae::Batch to_batch(std::span<const dataset::LabeledAirfoil* const> items);
vae::Batch to_batch(const dataset::Dataset& data);

struct SplitBatches {
    vae::Batch train;
    vae::Batch test;
};
SplitBatches split_batches(const dataset::Dataset& data, const dataset::DatasetSplit& split);

// first, first + step, ... (count values). Defaults give {0, 0.016, ..., 1.584}.
std::vector<double> label_sweep(double first = 0.0, double step = 0.016, std::size_t count = 100);

enum class Sampling { Random, Envelope };
std::string_view to_string(Sampling s);
Sampling sampling_from_string(std::string_view s);

// Posterior means, one row per batch row.
Matrix encode_means(const vae::CvaeModel& model, const vae::Batch& batch);

struct Envelope {
    Vector lower;
    Vector upper;
};
Envelope envelope_of(const Matrix& means);

// Random: uniform on the sphere for sphere models, standard normal prior for
// Gaussian ones. Envelope: per-axis uniform in [lower, upper]; Gaussian only.
Matrix sample_latents(const vae::CvaeModel& model, std::size_t count, Sampling sampling, const Envelope* envelope,
                      Rng& rng);

struct GeneratedShape {
    std::uint64_t source = 0;  // latent index, or dataset id for reconstructions
    Vector z;
    double label = 0.0;
    geometry::AirfoilShape shape;

    friend bool operator==(const GeneratedShape& a, const GeneratedShape& b) {
        return a.source == b.source && a.z == b.z && a.label == b.label && a.shape == b.shape;
    }
};

// Every latent row decoded at every label, latent-major.
std::vector<GeneratedShape> generate(const vae::CvaeModel& model, const Matrix& latents,
                                     std::span<const double> labels);
// Decode of each item's posterior mean at its own label.
std::vector<GeneratedShape> reconstruct(const vae::CvaeModel& model,
                                        std::span<const dataset::LabeledAirfoil* const> items);

std::string shapes_to_text(std::span<const GeneratedShape> shapes, std::size_t points);
std::vector<GeneratedShape> shapes_from_text(std::string_view text, std::size_t expected_points = 0);
void save_shapes(std::span<const GeneratedShape> shapes, std::size_t points, const std::string& path);
std::vector<GeneratedShape> load_shapes(const std::string& path, std::size_t expected_points = 0);

// Flattened members of each family, one per row. Empty when absent.
struct ReferenceSets {
    Matrix naca;
    Matrix joukowski;
    static ReferenceSets from(const dataset::Dataset& data);
};

struct EvalOptions {
    aero::FlowCondition flow;
    double epsilon = 0.02;
    bool roundness = true;
    // Roundness is expensive; compute it for every k-th shape only (NaN elsewhere).
    std::size_t roundness_stride = 1;
    bool set_distance = true;
};

struct ReportRow {
    std::uint64_t source = 0;
    double label = 0.0;
    double c_l_recomputed = 0.0;  // NaN when the solver failed
    double squared_error = 0.0;
    double distance_to_naca = 0.0;       // NaN without that family
    double distance_to_joukowski = 0.0;  // NaN without that family
    double w = 0.0;
};

struct GenerationReport {
    std::vector<ReportRow> rows;
    double epsilon = 0.02;
    double l_cl = 0.0;  // over rows with a recomputed lift
    std::size_t solver_failures = 0;
    std::size_t valid = 0;  // rows with squared error <= epsilon
    double v_valid = 0.0;   // variation of those rows (NaN if none)

    // Per-source selection: sources whose mean squared error over the label
    // sweep is below epsilon, and the variation among them at each label.
    std::vector<std::uint64_t> sources;
    std::vector<double> source_l_cl;
    std::vector<std::uint64_t> selected;
    std::vector<double> labels;
    std::vector<double> v_per_label;  // NaN where nothing was selected
    double mean_v = 0.0;              // mean over labels with a selection, NaN if none

    double set_distance = 0.0;  // NaN unless both families are present
};

GenerationReport evaluate(std::span<const GeneratedShape> shapes, const ReferenceSets& refs,
                          const EvalOptions& options = {});

struct LatentMapRow {
    std::uint64_t id = 0;
    Vector z;  // posterior mean at the item's own label
    double c_l = 0.0;
    dataset::Family family = dataset::Family::Naca;
    double w = 0.0;  // NaN when skipped
};

// roundness_stride 0 skips w entirely.
std::vector<LatentMapRow> latent_map(const vae::CvaeModel& model, const dataset::Dataset& data,
                                     std::size_t roundness_stride = 1);
// Columns: id, z1..zk, c_l, family, w.
std::string latent_map_tsv(std::span<const LatentMapRow> rows);

// One row per shape, columns named as in ReportRow.
std::string report_tsv(const GenerationReport& report);
std::string report_summary_json(const GenerationReport& report);

}  // namespace foilgen::pipeline
