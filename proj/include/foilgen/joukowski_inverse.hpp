#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include "foilgen/error.hpp"
#include "foilgen/geometry.hpp"

namespace foilgen::jinv {

// Algebraic (Kasa) circle fit: x^2 + y^2 + A x + B y + C = 0 in the least
// squares sense, with A = -2a, B = -2b, C = a^2 + b^2 - r^2.
struct CircleFit {
    double a = 0.0;
    double b = 0.0;
    double r_fit = 0.0;
    double omega = 0.0;  // sum of squared residuals (x-a)^2 + (y-b)^2 - r^2
};

struct InverseFitResult {
    double c_j = 0.0;
    double ell = 0.0;
    double m = 0.0;
    CircleFit fit;
    double w = 0.0;            // fit.omega / point_count
    std::size_t point_count = 0;
    int branch = +1;           // root family that gave the lower residual
};

// Fit radius the recovered circle is rescaled to. The forward map is scale
// equivariant, so (c_J, l, m) are only defined up to a common factor; fixing
// the circle radius pins that factor and makes w comparable across shapes.
inline constexpr double kReferenceRadius = 1.1;

enum class Branch { Plus = +1, Minus = -1 };

// De-normalize zeta = zeta_hat * m + ell and invert zeta = z + c^2/z. Branch
// Plus starts the leading-edge point on the larger-|z| root, Minus on the
// smaller; every other point takes the root nearer its neighbour's image,
// walking from the leading edge toward both ends of the contour.
std::vector<std::complex<double>> inverse_map(std::span<const geometry::Point2> shape, double c_j, double ell, double m,
                                              Branch branch);

CircleFit fit_circle(std::span<const std::complex<double>> points);
CircleFit fit_circle(std::span<const geometry::Point2> points);

class RoundnessError : public OptimizationError {
public:
    RoundnessError(const std::string& what, InverseFitResult best) : OptimizationError(what), best_(best) {}
    const InverseFitResult& best() const { return best_; }

private:
    InverseFitResult best_;
};

// Minimizes the normalized circle-fit residual over (c_J, l, m) with a
// 3x3 multi-start Nelder-Mead. A closed input's duplicate end point is
// ignored. Throws RoundnessError if no start converges.
InverseFitResult roundness(std::span<const geometry::Point2> shape);
inline InverseFitResult roundness(const geometry::AirfoilShape& shape) { return roundness(shape.points()); }

}  // namespace foilgen::jinv
