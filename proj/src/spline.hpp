#pragma once

// Internal 1-D interpolants used by geometry::resample.

#include <span>
#include <vector>

namespace foilgen::detail {

// Cubic spline with not-a-knot end conditions. Requires >= 4 strictly
// increasing knots.
class NotAKnotSpline {
public:
    NotAKnotSpline(std::span<const double> t, std::span<const double> y);
    double operator()(double t) const;

private:
    std::vector<double> t_;
    std::vector<double> y_;
    std::vector<double> m_;  // second derivatives at the knots
};

// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson) on the
// unit-spaced grid 0, 1, ..., y.size()-1.
class PchipUnitGrid {
public:
    explicit PchipUnitGrid(std::span<const double> y);
    double operator()(double s) const;

private:
    std::vector<double> y_;
    std::vector<double> d_;
};

}  // namespace foilgen::detail
