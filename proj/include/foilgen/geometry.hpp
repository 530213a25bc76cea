#pragma once

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace foilgen::geometry {

inline constexpr std::size_t kDefaultPoints = 248;
inline constexpr std::size_t kMinPoints = 120;

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Point2&, const Point2&) = default;
};

// Closed, chord-normalized airfoil outline. Points run trailing edge ->
// upper surface -> leading edge -> lower surface -> trailing edge, and the
// last point repeats the first.
class AirfoilShape {
public:
    AirfoilShape() = default;
    explicit AirfoilShape(std::vector<Point2> points) : points_(std::move(points)) {}

    const std::vector<Point2>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    const Point2& operator[](std::size_t i) const { return points_[i]; }

    friend bool operator==(const AirfoilShape&, const AirfoilShape&) = default;

private:
    std::vector<Point2> points_;
};

// Flattened layout (x_1..x_n, y_1..y_n).
std::vector<double> flatten(const AirfoilShape& shape);
AirfoilShape unflatten(std::span<const double> s, std::size_t n);

struct Naca4Params {
    double m_camber = 0.0;  // max camber, fraction of chord
    double p_pos = 0.0;     // chordwise position of max camber
    double t_thick = 0.12;  // max thickness, fraction of chord

    void validate() const;
    friend bool operator==(const Naca4Params&, const Naca4Params&) = default;
};

// NACA 4-digit half thickness at chord station x in [0, 1], closed trailing
// edge variant (last coefficient -0.1036).
double naca4_half_thickness(double t_thick, double x);
double naca4_camber(const Naca4Params& params, double x);
double naca4_camber_slope(const Naca4Params& params, double x);

// Cosine-spaced NACA 4-digit section with n points (n even, n >= 120).
AirfoilShape naca4_profile(const Naca4Params& params, std::size_t n = kDefaultPoints);

struct JoukowskiParams {
    double a = 0.1;  // circle centre, real part
    double b = 0.0;  // circle centre, imaginary part
    double r = 1.1;  // circle radius

    void validate() const;
    // Positive root of (c_J - a)^2 = r^2 - b^2.
    double c_j() const;
    friend bool operator==(const JoukowskiParams&, const JoukowskiParams&) = default;
};

inline std::complex<double> joukowski_map(std::complex<double> z, double c_j) {
    return z + c_j * c_j / z;
}

struct JoukowskiAirfoil {
    AirfoilShape shape;
    double ell = 0.0;  // min Re(zeta) before scaling
    double m = 1.0;    // chord before scaling
};

// Maps the circle |z - (a+bi)| = r through zeta = z + c_J^2 / z, sampling n
// circle angles starting at the cusp point z = c_J, then rescales to unit chord.
JoukowskiAirfoil joukowski_airfoil(const JoukowskiParams& params, std::size_t n = kDefaultPoints);

// Arc-length parameterized cubic interpolation of a closed outline onto n
// points. Output stations follow the input's own node distribution (node
// index fraction), so a cosine-spaced input stays cosine-spaced.
AirfoilShape resample(std::span<const Point2> points, std::size_t n);

// Shoelace area; positive for counter-clockwise traversal.
double signed_area(std::span<const Point2> points);
// True if any two non-adjacent segments of the closed polyline intersect.
bool self_intersects(std::span<const Point2> points);

// x' = (x - ell) / m, y' = y / m with ell = min x and m = max x - min x.
struct Normalized {
    std::vector<Point2> points;
    double ell = 0.0;
    double m = 1.0;
};
Normalized normalize_chord(std::span<const Point2> points);

// Returns a description of the first violated AirfoilShape invariant, or
// nullopt if the shape satisfies them all.
std::optional<std::string> invariant_violation(const AirfoilShape& shape, double tol = 1e-9);

}  // namespace foilgen::geometry
