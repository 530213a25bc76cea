#include "foilgen/metrics.hpp"

#include <cmath>
#include <limits>

#include "foilgen/error.hpp"

namespace foilgen::metrics {

double cl_error(std::span<const double> labels, std::span<const double> recomputed) {
    if (labels.size() != recomputed.size()) throw ParameterError("cl_error: label and lift counts differ");
    if (labels.empty()) throw ParameterError("cl_error: no items");
    double sum = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const double d = labels[i] - recomputed[i];
        sum += d * d;
    }
    return sum / static_cast<double>(labels.size());
}

std::vector<std::size_t> filter_valid(std::span<const double> squared_errors, double epsilon) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < squared_errors.size(); ++i) {
        if (squared_errors[i] <= epsilon) keep.push_back(i);
    }
    return keep;
}

double shape_variation(const Matrix& shapes) {
    if (shapes.rows() == 0) throw ParameterError("shape_variation: empty set");
    const Eigen::RowVectorXd mean = shapes.colwise().mean();
    double sum = 0.0;
    for (Eigen::Index r = 0; r < shapes.rows(); ++r) sum += (shapes.row(r) - mean).norm();
    return sum / static_cast<double>(shapes.rows());
}

double distance_to_set(std::span<const double> shape, const Matrix& set) {
    if (set.rows() == 0) throw ParameterError("distance_to_set: empty set");
    if (static_cast<Eigen::Index>(shape.size()) != set.cols()) {
        throw ShapeError("distance_to_set: shape length " + std::to_string(shape.size()) + " vs set width " +
                         std::to_string(set.cols()));
    }
    const Eigen::Map<const Eigen::RowVectorXd> s(shape.data(), static_cast<Eigen::Index>(shape.size()));
    return std::sqrt((set.rowwise() - s).rowwise().squaredNorm().minCoeff());
}

double set_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() == 0 || b.rows() == 0) throw ParameterError("set_distance: empty set");
    if (a.cols() != b.cols()) throw ShapeError("set_distance: sets have different shape widths");
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        best = std::min(best, (b.rowwise() - a.row(r)).rowwise().squaredNorm().minCoeff());
    }
    return std::sqrt(best);
}

namespace {

Histogram bin(std::span<const double> values, std::vector<double> edges, bool log_scale) {
    Histogram h;
    h.edges = std::move(edges);
    h.log_scale = log_scale;
    const std::size_t bins = h.edges.size() - 1;
    h.counts.assign(bins, 0);
    const double lo = log_scale ? std::log10(h.edges.front()) : h.edges.front();
    const double hi = log_scale ? std::log10(h.edges.back()) : h.edges.back();
    for (double v : values) {
        if (std::isnan(v)) {
            ++h.ignored;
            continue;
        }
        const double x = log_scale ? (v > 0.0 ? std::log10(v) : -std::numeric_limits<double>::infinity()) : v;
        std::size_t k = 0;
        if (x < lo) {
            ++h.below;
        } else if (x >= hi) {
            ++h.above;
            k = bins - 1;
        } else {
            k = std::min(bins - 1, static_cast<std::size_t>((x - lo) / (hi - lo) * static_cast<double>(bins)));
        }
        ++h.counts[k];
    }
    return h;
}

void check_range(double lo, double hi, std::size_t bins) {
    if (bins == 0) throw ParameterError("histogram needs at least one bin");
    if (!(hi > lo)) throw ParameterError("histogram range is empty");
}

}  // namespace

Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
    check_range(lo, hi, bins);
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    return bin(values, std::move(edges), false);
}

Histogram log_histogram(std::span<const double> values, double lo, double hi, std::size_t bins) {
    check_range(lo, hi, bins);
    if (!(lo > 0.0)) throw ParameterError("log histogram needs a positive lower edge");
    const double a = std::log10(lo), b = std::log10(hi);
    std::vector<double> edges(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) {
        edges[i] = std::pow(10.0, a + (b - a) * static_cast<double>(i) / static_cast<double>(bins));
    }
    edges.front() = lo;
    edges.back() = hi;
    return bin(values, std::move(edges), true);
}

Histogram distance_histogram(std::span<const double> values) { return histogram(values, 0.0, 2.5, 40); }

Histogram roundness_histogram(std::span<const double> values) { return log_histogram(values, 1e-8, 1.0, 40); }

}  // namespace foilgen::metrics
