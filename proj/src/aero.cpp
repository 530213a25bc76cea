#include "foilgen/aero.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "foilgen/error.hpp"
#include "foilgen/parallel.hpp"

namespace foilgen::aero {

namespace {

using cplx = std::complex<double>;
constexpr double kPi = std::numbers::pi;

// log u, with u log u and u^2 log u taken as 0 at u = 0.
cplx safe_log(cplx u) { return std::abs(u) == 0.0 ? cplx(0.0) : std::log(u); }

struct PanelWeights {
    double a = 0.0;  // coefficient of the strength at the panel start
    double b = 0.0;  // coefficient of the strength at the panel end
};

// Stream function induced at local point z by a panel on [0, s] whose vortex
// strength varies linearly from 1 to 0 (a) and from 0 to 1 (b).
// psi = -(1/2pi) * integral gamma(t) ln|z - t| dt.
PanelWeights stream_weights(cplx z, double s) {
    const cplx zs = z - s;
    const cplx lz = safe_log(z);
    const cplx lzs = safe_log(zs);
    const double i0 = (z * lz - zs * lzs).real() - s;
    const auto g = [&](cplx u, cplx lu) { return z * (u * lu - u) - (0.5 * u * u * lu - 0.25 * u * u); };
    const double i1 = (g(z, lz) - g(zs, lzs)).real();
    const double f = -1.0 / (2.0 * kPi);
    return {f * (i0 - i1 / s), f * i1 / s};
}

// Complex velocity w = u - i v induced at local point z (off the panel) by the
// same two unit distributions, rotated back to global axes.
std::pair<cplx, cplx> velocity_weights(cplx z, double s, cplx tangent) {
    const cplx lg = std::log(z / (z - s));
    const cplx pre = cplx(0.0, -1.0) * std::conj(tangent) / (2.0 * kPi);
    return {pre * (lg * (1.0 - z / s) + 1.0), pre * (z * lg / s - 1.0)};
}

}  // namespace

void FlowCondition::validate() const {
    if (!(alpha_deg >= kMinAlphaDeg && alpha_deg <= kMaxAlphaDeg)) {
        throw ParameterError("angle of attack " + std::to_string(alpha_deg) + " deg outside [" +
                             std::to_string(kMinAlphaDeg) + ", " + std::to_string(kMaxAlphaDeg) + "]");
    }
}

PanelSolution solve_lift(const geometry::AirfoilShape& shape, const FlowCondition& flow) {
    flow.validate();
    std::vector<geometry::Point2> pts = shape.points();
    if (pts.size() < 4) throw SolverError("too few points for a panel solution");
    if (std::hypot(pts.front().x - pts.back().x, pts.front().y - pts.back().y) > 1e-9) {
        throw SolverError("panel method needs a closed contour");
    }
    // Work on a counter-clockwise contour so the body lies to the left.
    if (geometry::signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());

    const std::size_t nodes = pts.size();
    const std::size_t panels = nodes - 1;
    double xmin = pts[0].x, xmax = pts[0].x;
    for (const auto& p : pts) {
        xmin = std::min(xmin, p.x);
        xmax = std::max(xmax, p.x);
    }
    const double chord = xmax - xmin;
    if (!(chord > 0.0)) throw SolverError("contour has zero chord");

    std::vector<cplx> start(panels), tangent(panels);
    std::vector<double> length(panels);
    for (std::size_t k = 0; k < panels; ++k) {
        const cplx a(pts[k].x, pts[k].y);
        const cplx b(pts[k + 1].x, pts[k + 1].y);
        length[k] = std::abs(b - a);
        if (!(length[k] > 1e-12 * chord)) throw SolverError("zero-length panel in contour");
        start[k] = a;
        tangent[k] = (b - a) / length[k];
    }

    // Unknowns: gamma at every node (the trailing edge appears twice) and the
    // body stream function value psi0, stored last.
    const auto dim = static_cast<Eigen::Index>(nodes + 1);
    Eigen::MatrixXd matrix = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(dim);
    const double alpha = flow.alpha_deg * kPi / 180.0;
    const double uinf = std::cos(alpha);
    const double vinf = std::sin(alpha);
    const auto psi0_col = static_cast<Eigen::Index>(nodes);

    // Stream function constant along the body, imposed at each distinct node.
    for (std::size_t i = 0; i < panels; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const cplx p(pts[i].x, pts[i].y);
        for (std::size_t k = 0; k < panels; ++k) {
            const PanelWeights w = stream_weights((p - start[k]) * std::conj(tangent[k]), length[k]);
            matrix(row, static_cast<Eigen::Index>(k)) += w.a;
            matrix(row, static_cast<Eigen::Index>(k + 1)) += w.b;
        }
        matrix(row, psi0_col) = -1.0;
        rhs(row) = -(uinf * pts[i].y - vinf * pts[i].x);
    }

    // Kutta: equal and opposite strengths at the two trailing-edge nodes.
    const auto kutta_row = static_cast<Eigen::Index>(panels);
    matrix(kutta_row, 0) = 1.0;
    matrix(kutta_row, static_cast<Eigen::Index>(panels)) = 1.0;

    // The two trailing-edge nodes coincide, so their stream function rows are
    // the same equation. The last row instead asks for zero velocity along the
    // bisector direction at a point just inside the body, where the flow is at rest.
    {
        const cplx te = start[0];
        const cplx bisector = tangent[0] - tangent[panels - 1];
        if (!(std::abs(bisector) > 0.0)) throw SolverError("trailing edge folds back on itself");
        const cplx dir = bisector / std::abs(bisector);
        const cplx probe = te + 0.1 * std::min(length[0], length[panels - 1]) * dir;
        const auto row = static_cast<Eigen::Index>(nodes);
        for (std::size_t k = 0; k < panels; ++k) {
            const auto [wa, wb] = velocity_weights((probe - start[k]) * std::conj(tangent[k]), length[k], tangent[k]);
            // w = u - i v, so the component along dir is Re(w * dir).
            matrix(row, static_cast<Eigen::Index>(k)) += (wa * dir).real();
            matrix(row, static_cast<Eigen::Index>(k + 1)) += (wb * dir).real();
        }
        rhs(row) = -(cplx(uinf, -vinf) * dir).real();
    }

    Eigen::PartialPivLU<Eigen::MatrixXd> lu(matrix);
    if (!(lu.rcond() > 1e-14)) throw SolverError("singular influence matrix (degenerate geometry)");
    const Eigen::VectorXd solution = lu.solve(rhs);
    if (!solution.allFinite()) throw SolverError("non-finite vortex strengths");
    const Eigen::VectorXd gamma = solution.head(static_cast<Eigen::Index>(nodes));

    PanelSolution sol;
    sol.gamma.assign(gamma.data(), gamma.data() + gamma.size());
    sol.cp.resize(panels);
    double circulation = 0.0;
    for (std::size_t k = 0; k < panels; ++k) {
        const double g = 0.5 * (sol.gamma[k] + sol.gamma[k + 1]);
        circulation += g * length[k];
        sol.cp[k] = 1.0 - g * g;
    }
    // Counter-clockwise circulation Gamma gives lift -rho U Gamma.
    sol.c_l = -2.0 * circulation / chord;
    if (!std::isfinite(sol.c_l)) throw SolverError("non-finite lift coefficient");
    return sol;
}

std::vector<LabelOutcome> label_dataset(std::span<const geometry::AirfoilShape> shapes, const FlowCondition& flow) {
    flow.validate();
    std::vector<LabelOutcome> out(shapes.size());
    parallel_for(shapes.size(), [&](std::size_t i) {
        try {
            out[i].c_l = solve_lift(shapes[i], flow).c_l;
        } catch (const Error& e) {
            out[i].error = e.what();
        }
    });
    return out;
}

}  // namespace foilgen::aero
