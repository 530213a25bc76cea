#include "foilgen/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "foilgen/error.hpp"
#include "spline.hpp"

namespace foilgen::geometry {

namespace {

constexpr double kPi = std::numbers::pi;

void require_point_count(std::size_t n) {
    if (n < kMinPoints) {
        throw ParameterError("point count " + std::to_string(n) + " is below the floor of " +
                             std::to_string(kMinPoints));
    }
}

double cross(const Point2& o, const Point2& a, const Point2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

bool on_box(const Point2& p, const Point2& q, const Point2& r) {
    return std::min(p.x, q.x) <= r.x && r.x <= std::max(p.x, q.x) && std::min(p.y, q.y) <= r.y &&
           r.y <= std::max(p.y, q.y);
}

bool segments_intersect(const Point2& p1, const Point2& p2, const Point2& q1, const Point2& q2) {
    const double d1 = cross(q1, q2, p1);
    const double d2 = cross(q1, q2, p2);
    const double d3 = cross(p1, p2, q1);
    const double d4 = cross(p1, p2, q2);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0))) return true;
    if (d1 == 0 && on_box(q1, q2, p1)) return true;
    if (d2 == 0 && on_box(q1, q2, p2)) return true;
    if (d3 == 0 && on_box(p1, p2, q1)) return true;
    if (d4 == 0 && on_box(p1, p2, q2)) return true;
    return false;
}

bool is_closed(std::span<const Point2> pts, double tol = 1e-12) {
    return std::abs(pts.front().x - pts.back().x) <= tol && std::abs(pts.front().y - pts.back().y) <= tol;
}

}  // namespace

std::vector<double> flatten(const AirfoilShape& shape) {
    const auto& pts = shape.points();
    const std::size_t n = pts.size();
    std::vector<double> s(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        s[i] = pts[i].x;
        s[n + i] = pts[i].y;
    }
    return s;
}

AirfoilShape unflatten(std::span<const double> s, std::size_t n) {
    if (s.size() != 2 * n) {
        throw ShapeError("flattened shape has length " + std::to_string(s.size()) + ", expected " +
                         std::to_string(2 * n));
    }
    std::vector<Point2> pts(n);
    for (std::size_t i = 0; i < n; ++i) pts[i] = {s[i], s[n + i]};
    return AirfoilShape(std::move(pts));
}

void Naca4Params::validate() const {
    auto fail = [this](const char* what) {
        std::ostringstream os;
        os << "invalid NACA parameters (m=" << m_camber << ", p=" << p_pos << ", t=" << t_thick << "): " << what;
        throw ParameterError(os.str());
    };
    if (!(m_camber >= 0.0 && m_camber <= 0.095)) fail("camber outside [0, 0.095]");
    if (!(p_pos >= 0.0 && p_pos <= 0.9)) fail("camber position outside [0, 0.9]");
    if (!(t_thick >= 0.01 && t_thick <= 0.40)) fail("thickness outside [0.01, 0.40]");
    if (p_pos == 0.0 && m_camber != 0.0) fail("camber position 0 requires zero camber");
}

double naca4_half_thickness(double t_thick, double x) {
    x = std::clamp(x, 0.0, 1.0);
    return 5.0 * t_thick *
           (0.2969 * std::sqrt(x) - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x - 0.1036 * x * x * x * x);
}

double naca4_camber(const Naca4Params& params, double x) {
    const double m = params.m_camber;
    const double p = params.p_pos;
    if (m == 0.0) return 0.0;
    if (x < p) return m / (p * p) * (2.0 * p * x - x * x);
    return m / ((1.0 - p) * (1.0 - p)) * ((1.0 - 2.0 * p) + 2.0 * p * x - x * x);
}

double naca4_camber_slope(const Naca4Params& params, double x) {
    const double m = params.m_camber;
    const double p = params.p_pos;
    if (m == 0.0) return 0.0;
    if (x < p) return 2.0 * m / (p * p) * (p - x);
    return 2.0 * m / ((1.0 - p) * (1.0 - p)) * (p - x);
}

AirfoilShape naca4_profile(const Naca4Params& params, std::size_t n) {
    params.validate();
    require_point_count(n);
    if (n % 2 != 0) throw ParameterError("NACA profile point count must be even");

    // Station i sits at angle theta_i = 2*pi*i/(n-1); theta < pi is the upper
    // surface, theta > pi the lower one, giving n/2 points per side.
    std::vector<Point2> pts(n);
    const double step = 2.0 * kPi / static_cast<double>(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double theta = step * static_cast<double>(i);
        const double xc = 0.5 * (1.0 + std::cos(theta));
        const double yt = naca4_half_thickness(params.t_thick, xc);
        const double yc = naca4_camber(params, xc);
        const double phi = std::atan(naca4_camber_slope(params, xc));
        if (i < n / 2) {
            pts[i] = {xc - yt * std::sin(phi), yc + yt * std::cos(phi)};
        } else {
            pts[i] = {xc + yt * std::sin(phi), yc - yt * std::cos(phi)};
        }
    }
    pts[n - 1] = pts[0];
    return AirfoilShape(normalize_chord(pts).points);
}

void JoukowskiParams::validate() const {
    if (!(r > 0.0)) throw ParameterError("Joukowski radius must be positive");
    if (!(r * r - b * b > 0.0)) throw ParameterError("Joukowski parameters need r^2 - b^2 > 0");
}

double JoukowskiParams::c_j() const { return a + std::sqrt(r * r - b * b); }

JoukowskiAirfoil joukowski_airfoil(const JoukowskiParams& params, std::size_t n) {
    params.validate();
    require_point_count(n);
    const double c = params.c_j();
    const std::complex<double> centre(params.a, params.b);
    const double phi0 = std::atan2(-params.b, std::sqrt(params.r * params.r - params.b * params.b));

    std::vector<Point2> pts(n);
    const double step = 2.0 * kPi / static_cast<double>(n - 1);
    pts[0] = {2.0 * c, 0.0};
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double phi = phi0 + step * static_cast<double>(i);
        const std::complex<double> z = centre + std::polar(params.r, phi);
        const std::complex<double> zeta = joukowski_map(z, c);
        pts[i] = {zeta.real(), zeta.imag()};
    }
    pts[n - 1] = pts[0];

    const double area = signed_area(pts);
    if (area < 0.0) std::reverse(pts.begin(), pts.end());

    Normalized norm = normalize_chord(pts);
    if (std::abs(area) / (norm.m * norm.m) < 1e-7) {
        throw DegenerateShapeError("Joukowski contour has no enclosed area (zero-thickness section)");
    }
    if (self_intersects(norm.points)) throw DegenerateShapeError("Joukowski contour self-intersects");
    return {AirfoilShape(std::move(norm.points)), norm.ell, norm.m};
}

double signed_area(std::span<const Point2> points) {
    double twice = 0.0;
    const std::size_t n = points.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Point2& p = points[i];
        const Point2& q = points[(i + 1) % n];
        twice += p.x * q.y - q.x * p.y;
    }
    return 0.5 * twice;
}

bool self_intersects(std::span<const Point2> points) {
    std::vector<Point2> pts(points.begin(), points.end());
    if (pts.size() >= 2 && !is_closed(pts)) pts.push_back(pts.front());
    const std::size_t nseg = pts.size() - 1;
    if (nseg < 3) return false;
    for (std::size_t i = 0; i < nseg; ++i) {
        const double ixmin = std::min(pts[i].x, pts[i + 1].x);
        const double ixmax = std::max(pts[i].x, pts[i + 1].x);
        const double iymin = std::min(pts[i].y, pts[i + 1].y);
        const double iymax = std::max(pts[i].y, pts[i + 1].y);
        for (std::size_t j = i + 2; j < nseg; ++j) {
            if (i == 0 && j == nseg - 1) continue;  // share the closing vertex
            if (std::max(pts[j].x, pts[j + 1].x) < ixmin || std::min(pts[j].x, pts[j + 1].x) > ixmax ||
                std::max(pts[j].y, pts[j + 1].y) < iymin || std::min(pts[j].y, pts[j + 1].y) > iymax) {
                continue;
            }
            if (segments_intersect(pts[i], pts[i + 1], pts[j], pts[j + 1])) return true;
        }
    }
    return false;
}

Normalized normalize_chord(std::span<const Point2> points) {
    if (points.empty()) throw ShapeError("cannot normalize an empty outline");
    double lo = points.front().x;
    double hi = points.front().x;
    for (const auto& p : points) {
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
    }
    const double m = hi - lo;
    if (!(m > 0.0)) throw DegenerateShapeError("outline has zero chord");
    Normalized out;
    out.ell = lo;
    out.m = m;
    out.points.reserve(points.size());
    for (const auto& p : points) out.points.push_back({(p.x - lo) / m, p.y / m});
    return out;
}

AirfoilShape resample(std::span<const Point2> points, std::size_t n) {
    if (points.size() < 4) throw ShapeError("resample needs at least 4 input points");
    require_point_count(n);

    std::vector<Point2> pts;
    pts.reserve(points.size() + 1);
    for (const auto& p : points) {
        if (!pts.empty() && p == pts.back()) continue;
        pts.push_back(p);
    }
    if (!is_closed(pts)) pts.push_back(pts.front());
    if (pts.size() < 5) throw ShapeError("resample needs at least 4 distinct points");
    if (self_intersects(pts)) throw DegenerateShapeError("cannot resample a self-intersecting outline");

    const std::size_t m = pts.size();
    std::vector<double> u(m, 0.0), xs(m), ys(m);
    for (std::size_t i = 0; i < m; ++i) {
        xs[i] = pts[i].x;
        ys[i] = pts[i].y;
        if (i > 0) u[i] = u[i - 1] + std::hypot(pts[i].x - pts[i - 1].x, pts[i].y - pts[i - 1].y);
    }
    const detail::NotAKnotSpline sx(u, xs);
    const detail::NotAKnotSpline sy(u, ys);
    const detail::PchipUnitGrid station(u);

    std::vector<Point2> out(n);
    const double scale = static_cast<double>(m - 1) / static_cast<double>(n - 1);
    for (std::size_t j = 0; j + 1 < n; ++j) {
        const double t = station(static_cast<double>(j) * scale);
        out[j] = {sx(t), sy(t)};
    }
    out[0] = pts.front();
    out[n - 1] = out[0];
    return AirfoilShape(std::move(out));
}

std::optional<std::string> invariant_violation(const AirfoilShape& shape, double tol) {
    const auto& pts = shape.points();
    if (pts.size() < kMinPoints) return "fewer than " + std::to_string(kMinPoints) + " points";
    for (const auto& p : pts) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y)) return std::string("non-finite coordinate");
    }
    if (!is_closed(pts, tol)) return std::string("contour is not closed");
    double lo = pts.front().x;
    double hi = pts.front().x;
    for (const auto& p : pts) {
        lo = std::min(lo, p.x);
        hi = std::max(hi, p.x);
    }
    if (std::abs((hi - lo) - 1.0) > tol) return std::string("chord is not 1");
    if (pts.front().x < hi - tol) return std::string("contour does not start at the trailing edge");
    if (!(signed_area(pts) > 0.0)) return std::string("contour is not ordered upper surface first");
    return std::nullopt;
}

}  // namespace foilgen::geometry
