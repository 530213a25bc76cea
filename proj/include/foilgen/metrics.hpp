#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace foilgen::metrics {

using Matrix = Eigen::MatrixXd;

inline constexpr double kDefaultEpsilon = 0.02;

// Mean squared difference between target labels and recomputed lift.
double cl_error(std::span<const double> labels, std::span<const double> recomputed);

// Indices whose squared label error is <= epsilon. NaN errors never pass.
std::vector<std::size_t> filter_valid(std::span<const double> squared_errors, double epsilon = kDefaultEpsilon);

// Mean Euclidean distance of the rows of `shapes` from their mean row.
double shape_variation(const Matrix& shapes);

// Nearest-member distance of one flattened shape to the rows of `set`.
double distance_to_set(std::span<const double> shape, const Matrix& set);
// Minimum distance over all cross pairs. This is our reading of "distance
// between two sets"; it is reported as such wherever it is printed.
double set_distance(const Matrix& a, const Matrix& b);
inline constexpr const char* kSetDistanceNote = "set distance = minimum Euclidean distance over cross pairs";

struct Histogram {
    std::vector<double> edges;  // bins + 1 edges
    std::vector<std::size_t> counts;
    // Values outside [edges.front(), edges.back()) are counted in the end
    // bins; these record how many were clamped.
    std::size_t below = 0;
    std::size_t above = 0;
    std::size_t ignored = 0;  // NaN
    bool log_scale = false;
};

Histogram histogram(std::span<const double> values, double lo, double hi, std::size_t bins);
Histogram log_histogram(std::span<const double> values, double lo, double hi, std::size_t bins);
// Fixed edges so runs are comparable.
Histogram distance_histogram(std::span<const double> values);   // 40 bins over [0, 2.5]
Histogram roundness_histogram(std::span<const double> values);  // 40 log bins over [1e-8, 1]

}  // namespace foilgen::metrics
