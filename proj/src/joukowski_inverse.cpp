#include "foilgen/joukowski_inverse.hpp"

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>
#include <algorithm>
#include <cmath>
#include <limits>

#include "foilgen/optimize.hpp"

namespace foilgen::jinv {

namespace {

using cplx = std::complex<double>;

std::vector<geometry::Point2> open_contour(std::span<const geometry::Point2> shape) {
    std::vector<geometry::Point2> pts(shape.begin(), shape.end());
    if (pts.size() >= 2 && std::abs(pts.front().x - pts.back().x) <= 1e-12 &&
        std::abs(pts.front().y - pts.back().y) <= 1e-12) {
        pts.pop_back();
    }
    return pts;
}

struct Evaluation {
    CircleFit fit;
    double w = std::numeric_limits<double>::infinity();  // scale-free residual
    Branch branch = Branch::Plus;
};

// Residual of the inverse image for unit de-normalization scale, rescaled as
// if the fitted circle had the reference radius.
Evaluation evaluate(std::span<const geometry::Point2> pts, double c, double ell) {
    Evaluation best;
    for (Branch br : {Branch::Plus, Branch::Minus}) {
        try {
            const auto z = inverse_map(pts, c, ell, 1.0, br);
            const CircleFit fit = fit_circle(z);
            const double s = kReferenceRadius / fit.r_fit;
            const double w = fit.omega * std::pow(s, 4) / static_cast<double>(pts.size());
            // Both root families fit equally well for an exact Joukowski
            // section (one image is the inversion of the other). Prefer Minus,
            // whose circle encloses the origin like the generating circle.
            const bool wins = br == Branch::Minus ? w <= best.w * (1.0 + 1e-6) + 1e-13 : w < best.w;
            if (std::isfinite(w) && wins) best = {fit, w, br};
        } catch (const Error&) {
            // Collinear image or non-positive radius: this branch is unusable here.
        }
    }
    return best;
}

InverseFitResult to_result(const Evaluation& ev, double c, double ell, std::size_t count) {
    const double s = kReferenceRadius / ev.fit.r_fit;
    InverseFitResult r;
    r.c_j = std::abs(c) * s;
    r.ell = ell * s;
    r.m = s;
    r.fit = {ev.fit.a * s, ev.fit.b * s, kReferenceRadius, ev.fit.omega * std::pow(s, 4)};
    r.point_count = count;
    r.w = r.fit.omega / static_cast<double>(count);
    r.branch = static_cast<int>(ev.branch);
    return r;
}

}  // namespace

std::vector<cplx> inverse_map(std::span<const geometry::Point2> shape, double c_j, double ell, double m,
                              Branch branch) {
    if (!(m > 0.0)) throw ParameterError("inverse_map: scale m must be positive");
    const std::size_t n = shape.size();
    std::vector<cplx> out(n);
    if (n == 0) return out;

    auto roots = [&](std::size_t i) {
        const cplx zeta(shape[i].x * m + ell, shape[i].y * m);
        const cplx disc = std::sqrt((zeta - 2.0 * c_j) * (zeta + 2.0 * c_j));
        return std::pair<cplx, cplx>{0.5 * (zeta + disc), 0.5 * (zeta - disc)};
    };
    auto pick = [](const std::pair<cplx, cplx>& r, cplx target) {
        return std::abs(r.first - target) <= std::abs(r.second - target) ? r.first : r.second;
    };

    // Start where the two roots are furthest apart; near zeta = +-2c they
    // merge and the choice is ambiguous.
    std::vector<std::pair<cplx, cplx>> all(n);
    std::size_t start = 0;
    for (std::size_t i = 0; i < n; ++i) {
        all[i] = roots(i);
        if (std::abs(all[i].first - all[i].second) > std::abs(all[start].first - all[start].second)) start = i;
    }
    const auto& r0 = all[start];
    const bool first_larger = std::abs(r0.first) >= std::abs(r0.second);
    out[start] = (branch == Branch::Plus) == first_larger ? r0.first : r0.second;

    // Each step takes the root nearer the linear extrapolation of the two
    // previous images, which follows the curve through close root pairs.
    for (std::size_t i = start + 1; i < n; ++i) {
        const cplx target = i >= start + 2 ? 2.0 * out[i - 1] - out[i - 2] : out[i - 1];
        out[i] = pick(all[i], target);
    }
    for (std::size_t i = start; i-- > 0;) {
        const cplx target = i + 2 <= start ? 2.0 * out[i + 1] - out[i + 2] : out[i + 1];
        out[i] = pick(all[i], target);
    }
    return out;
}

CircleFit fit_circle(std::span<const cplx> points) {
    const std::size_t n = points.size();
    if (n < 3) throw ParameterError("fit_circle needs at least 3 points");

    // Work about the centroid and in units of the point spread so the normal
    // matrix is well scaled; the fitted circle is mapped back afterwards.
    cplx centre(0.0, 0.0);
    for (const auto& p : points) centre += p;
    centre /= static_cast<double>(n);
    double spread = 0.0;
    for (const auto& p : points) spread = std::max(spread, std::abs(p - centre));
    if (!(spread > 0.0) || !std::isfinite(spread)) throw SolverError("fit_circle: points coincide");

    Eigen::Matrix3d lhs = Eigen::Matrix3d::Zero();
    Eigen::Vector3d rhs = Eigen::Vector3d::Zero();
    for (const auto& p : points) {
        const cplx q = (p - centre) / spread;
        const double x = q.real(), y = q.imag();
        const double rr = x * x + y * y;
        const Eigen::Vector3d row(x, y, 1.0);
        lhs += row * row.transpose();
        rhs -= rr * row;
    }
    Eigen::FullPivLU<Eigen::Matrix3d> lu(lhs);
    lu.setThreshold(1e-12);
    if (lu.rank() < 3) throw SolverError("fit_circle: points are collinear");
    const Eigen::Vector3d abc = lu.solve(rhs);

    const double a = -0.5 * abc(0);
    const double b = -0.5 * abc(1);
    const double r2 = a * a + b * b - abc(2);
    if (!(r2 > 0.0)) throw SolverError("fit_circle: no real circle fits the points");

    CircleFit fit;
    fit.a = centre.real() + spread * a;
    fit.b = centre.imag() + spread * b;
    fit.r_fit = spread * std::sqrt(r2);
    const double scale4 = std::pow(spread, 4);
    for (const auto& p : points) {
        const cplx q = (p - centre) / spread;
        const double dx = q.real() - a, dy = q.imag() - b;
        const double res = dx * dx + dy * dy - r2;
        fit.omega += res * res * scale4;
    }
    return fit;
}

CircleFit fit_circle(std::span<const geometry::Point2> points) {
    std::vector<cplx> z;
    z.reserve(points.size());
    for (const auto& p : points) z.emplace_back(p.x, p.y);
    return fit_circle(z);
}

InverseFitResult roundness(std::span<const geometry::Point2> shape) {
    const std::vector<geometry::Point2> pts = open_contour(shape);
    if (pts.size() < 3) throw ShapeError("roundness needs at least 3 distinct points");

    double xmin = pts[0].x, xmax = pts[0].x;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
    }
    const double chord = xmax - xmin;
    if (!(chord > 0.0)) throw DegenerateShapeError("roundness: shape has zero chord");

    // Search in (c, tau) with l = 2c - x_te + tau, i.e. tau is how far the
    // trailing edge sits from the branch point zeta = 2c. Joukowski sections
    // have c between roughly 0.2 and 0.25 chords. Outside a window around that
    // the map turns any thin outline into a nearly straight arc, which a huge
    // circle fits well, so c and tau are boxed.
    const double c_lo = 0.15 * chord, c_hi = 0.30 * chord, tau_max = 0.05 * chord;
    const double x_te = pts[0].x;
    const auto ell_of = [&](double c, double tau) { return 2.0 * c - x_te + tau; };
    const auto objective = [&](const std::vector<double>& v) {
        if (!(v[0] >= c_lo && v[0] <= c_hi && std::abs(v[1]) <= tau_max)) {
            return std::numeric_limits<double>::infinity();
        }
        return evaluate(pts, v[0], ell_of(v[0], v[1])).w;
    };

    // The basin of an exact Joukowski section is very narrow in c, so locate
    // it on a fine scan with the trailing edge pinned to the branch point.
    constexpr int kScan = 300;
    double c_star = 0.25 * chord, w_star = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= kScan; ++i) {
        const double c = c_lo + (c_hi - c_lo) * i / kScan;
        const double w = objective({c, 0.0});
        if (w < w_star) {
            w_star = w;
            c_star = c;
        }
    }

    const double dc = (c_hi - c_lo) / kScan;
    {
        const double lo = std::max(c_lo, c_star - dc), hi = std::min(c_hi, c_star + dc);
        const auto line = boost::math::tools::brent_find_minima([&](double c) { return objective({c, 0.0}); }, lo, hi,
                                                                std::numeric_limits<double>::digits / 2);
        if (line.second < w_star) c_star = line.first;
    }

    optimize::NelderMeadOptions opts;
    opts.f_tol = 1e-12;
    opts.max_iter = 2000;

    bool any_converged = false;
    double best_w = std::numeric_limits<double>::infinity();
    std::vector<double> best_x{c_star, 0.0};
    for (double fc : {-1.0, 0.0, 1.0}) {
        for (double ft : {-1.0, 0.0, 1.0}) {
            const std::vector<double> start{c_star + 1e-4 * fc * dc, 1e-5 * ft * chord};
            const auto res = optimize::nelder_mead(objective, start, {1e-3 * dc, 1e-5 * chord}, opts);
            if (!std::isfinite(res.f)) continue;
            const bool better = res.f < best_w;
            if (res.converged && (!any_converged || better)) {
                any_converged = true;
                best_w = res.f;
                best_x = res.x;
            } else if (!any_converged && better) {
                best_w = res.f;
                best_x = res.x;
            }
        }
    }
    best_x[1] = ell_of(best_x[0], best_x[1]);

    const Evaluation ev = evaluate(pts, best_x[0], best_x[1]);
    if (!std::isfinite(ev.w)) {
        throw RoundnessError("roundness: no start produced a finite residual", InverseFitResult{});
    }
    InverseFitResult result = to_result(ev, best_x[0], best_x[1], pts.size());
    if (!any_converged) throw RoundnessError("roundness: Nelder-Mead did not converge from any start", result);
    return result;
}

}  // namespace foilgen::jinv
