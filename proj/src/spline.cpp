#include "spline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace foilgen::detail {

NotAKnotSpline::NotAKnotSpline(std::span<const double> t, std::span<const double> y)
    : t_(t.begin(), t.end()), y_(y.begin(), y.end()) {
    const std::size_t npts = t_.size();
    if (npts < 4 || y_.size() != npts) throw std::invalid_argument("spline needs >= 4 matching knots");
    const std::size_t nint = npts - 1;
    std::vector<double> h(nint);
    for (std::size_t i = 0; i < nint; ++i) {
        h[i] = t_[i + 1] - t_[i];
        if (!(h[i] > 0.0)) throw std::invalid_argument("spline knots must increase strictly");
    }

    // Unknowns M_1..M_{nint-1}; M_0 and M_nint eliminated by not-a-knot.
    const std::size_t k = nint - 1;
    std::vector<double> lower(k, 0.0), diag(k, 0.0), upper(k, 0.0), rhs(k, 0.0);
    for (std::size_t r = 0; r < k; ++r) {
        const std::size_t i = r + 1;
        lower[r] = h[i - 1];
        diag[r] = 2.0 * (h[i - 1] + h[i]);
        upper[r] = h[i];
        rhs[r] = 6.0 * ((y_[i + 1] - y_[i]) / h[i] - (y_[i] - y_[i - 1]) / h[i - 1]);
    }
    const double h0 = h[0];
    const double h1 = h[1];
    diag[0] += h0 * (h0 + h1) / h1;
    upper[0] -= h0 * h0 / h1;
    const double ha = h[nint - 2];
    const double hb = h[nint - 1];
    diag[k - 1] += hb * (ha + hb) / ha;
    lower[k - 1] -= hb * hb / ha;

    // Thomas algorithm.
    for (std::size_t r = 1; r < k; ++r) {
        const double w = lower[r] / diag[r - 1];
        diag[r] -= w * upper[r - 1];
        rhs[r] -= w * rhs[r - 1];
    }
    std::vector<double> inner(k);
    inner[k - 1] = rhs[k - 1] / diag[k - 1];
    for (std::size_t r = k - 1; r-- > 0;) inner[r] = (rhs[r] - upper[r] * inner[r + 1]) / diag[r];

    m_.assign(npts, 0.0);
    for (std::size_t r = 0; r < k; ++r) m_[r + 1] = inner[r];
    m_[0] = ((h0 + h1) * m_[1] - h0 * m_[2]) / h1;
    m_[nint] = ((ha + hb) * m_[nint - 1] - hb * m_[nint - 2]) / ha;
}

double NotAKnotSpline::operator()(double t) const {
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    k = std::min(k, t_.size() - 2);
    const double h = t_[k + 1] - t_[k];
    const double a = t_[k + 1] - t;
    const double b = t - t_[k];
    return m_[k] * a * a * a / (6.0 * h) + m_[k + 1] * b * b * b / (6.0 * h) +
           (y_[k] / h - m_[k] * h / 6.0) * a + (y_[k + 1] / h - m_[k + 1] * h / 6.0) * b;
}

PchipUnitGrid::PchipUnitGrid(std::span<const double> y) : y_(y.begin(), y.end()) {
    const std::size_t n = y_.size();
    if (n < 2) throw std::invalid_argument("pchip needs >= 2 values");
    d_.assign(n, 0.0);
    std::vector<double> delta(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = y_[i + 1] - y_[i];
    if (n == 2) {
        d_[0] = d_[1] = delta[0];
        return;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) continue;
        d_[i] = 2.0 * delta[i - 1] * delta[i] / (delta[i - 1] + delta[i]);
    }
    auto end_slope = [](double d0, double d1) {
        double d = 0.5 * (3.0 * d0 - d1);
        if (d * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(d) > std::abs(3.0 * d0)) return 3.0 * d0;
        return d;
    };
    d_[0] = end_slope(delta[0], delta[1]);
    d_[n - 1] = end_slope(delta[n - 2], delta[n - 3]);
}

double PchipUnitGrid::operator()(double s) const {
    const std::size_t n = y_.size();
    const double clamped = std::clamp(s, 0.0, static_cast<double>(n - 1));
    std::size_t k = static_cast<std::size_t>(std::floor(clamped));
    k = std::min(k, n - 2);
    const double u = clamped - static_cast<double>(k);
    if (u == 0.0) return y_[k];
    const double u2 = u * u;
    const double u3 = u2 * u;
    const double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    const double h10 = u3 - 2.0 * u2 + u;
    const double h01 = -2.0 * u3 + 3.0 * u2;
    const double h11 = u3 - u2;
    return h00 * y_[k] + h10 * d_[k] + h01 * y_[k + 1] + h11 * d_[k + 1];
}

}  // namespace foilgen::detail
