#include <cmath>
#include <numbers>

#include "doctest.h"
#include "foilgen/error.hpp"
#include "foilgen/geometry.hpp"

using namespace foilgen;
using namespace foilgen::geometry;

namespace {

// Independent evaluation of the NACA 4-digit equations, used as the oracle
// for naca4_profile.
std::vector<Point2> naca_oracle(double m, double p, double t, std::size_t n) {
    std::vector<Point2> raw;
    for (std::size_t i = 0; i < n; ++i) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n - 1);
        const double x = (1.0 + std::cos(theta)) / 2.0;
        const double yt = t / 0.2 *
                          (0.2969 * std::sqrt(x) - 0.1260 * x - 0.3516 * std::pow(x, 2) + 0.2843 * std::pow(x, 3) -
                           0.1036 * std::pow(x, 4));
        double yc = 0.0;
        double dyc = 0.0;
        if (m > 0.0) {
            if (x < p) {
                yc = m / (p * p) * (2 * p * x - x * x);
                dyc = 2 * m / (p * p) * (p - x);
            } else {
                yc = m / ((1 - p) * (1 - p)) * (1 - 2 * p + 2 * p * x - x * x);
                dyc = 2 * m / ((1 - p) * (1 - p)) * (p - x);
            }
        }
        const double th = std::atan(dyc);
        const bool upper = i < n / 2;
        const double sgn = upper ? 1.0 : -1.0;
        raw.push_back({x - sgn * yt * std::sin(th), yc + sgn * yt * std::cos(th)});
    }
    raw.back() = raw.front();
    double lo = 1e9, hi = -1e9;
    for (auto& q : raw) {
        lo = std::min(lo, q.x);
        hi = std::max(hi, q.x);
    }
    for (auto& q : raw) q = {(q.x - lo) / (hi - lo), q.y / (hi - lo)};
    return raw;
}

bool has_mirror(const AirfoilShape& s, const Point2& p, double tol) {
    for (const auto& q : s.points()) {
        if (std::abs(q.x - p.x) <= tol && std::abs(q.y + p.y) <= tol) return true;
    }
    return false;
}

}  // namespace

TEST_CASE("NACA 0012 is symmetric about the chord line") {
    const auto shape = naca4_profile({0.0, 0.0, 0.12});
    for (const auto& p : shape.points()) CHECK(has_mirror(shape, p, 1e-9));
}

TEST_CASE("NACA half thickness matches the closed-trailing-edge polynomial") {
    const double x = 0.30;
    const double expected =
        0.6 * (0.2969 * std::sqrt(x) - 0.1260 * x - 0.3516 * x * x + 0.2843 * x * x * x - 0.1036 * x * x * x * x);
    CHECK(naca4_half_thickness(0.12, x) == doctest::Approx(expected).epsilon(1e-15));
    CHECK(std::abs(naca4_half_thickness(0.12, 1.0)) < 1e-15);
}

TEST_CASE("naca4_profile agrees with direct polynomial evaluation") {
    for (const auto& prm : {Naca4Params{0.0, 0.0, 0.12}, Naca4Params{0.02, 0.4, 0.12},
                            Naca4Params{0.09, 0.7, 0.24}, Naca4Params{0.05, 0.2, 0.06}}) {
        const auto shape = naca4_profile(prm, 248);
        const auto oracle = naca_oracle(prm.m_camber, prm.p_pos, prm.t_thick, 248);
        REQUIRE(shape.size() == oracle.size());
        double err = 0.0;
        for (std::size_t i = 0; i < oracle.size(); ++i) {
            err = std::max({err, std::abs(shape[i].x - oracle[i].x), std::abs(shape[i].y - oracle[i].y)});
        }
        CHECK(err < 1e-9);
        CHECK_FALSE(invariant_violation(shape).has_value());
    }
}

TEST_CASE("flattened default shape has 2n entries and round-trips exactly") {
    const auto shape = naca4_profile({0.04, 0.4, 0.15});
    const auto s = flatten(shape);
    CHECK(s.size() == 496);
    CHECK(unflatten(s, 248) == shape);
    std::vector<double> bad(495, 0.0);
    CHECK_THROWS_AS(unflatten(bad, 248), ShapeError);
}

TEST_CASE("NACA parameter validation") {
    CHECK_THROWS_AS(naca4_profile({0.1, 0.4, 0.12}), ParameterError);
    CHECK_THROWS_AS(naca4_profile({0.02, 0.0, 0.12}), ParameterError);
    CHECK_THROWS_AS(naca4_profile({0.0, 0.0, 0.005}), ParameterError);
    CHECK_THROWS_AS(naca4_profile({0.0, 0.0, 0.12}, 100), ParameterError);
    CHECK_THROWS_AS(naca4_profile({0.0, 0.0, 0.12}, 249), ParameterError);
}

TEST_CASE("Joukowski flat plate is rejected as degenerate") {
    CHECK_THROWS_AS(joukowski_airfoil({0.0, 0.0, 1.1}), DegenerateShapeError);
    CHECK_THROWS_AS(joukowski_airfoil({0.0, 0.1, 1.1}), DegenerateShapeError);
    CHECK_THROWS_AS(joukowski_airfoil({0.1, 1.2, 1.1}), ParameterError);
}

TEST_CASE("uncambered Joukowski section is symmetric") {
    const auto j = joukowski_airfoil({0.1, 0.0, 1.1});
    for (const auto& p : j.shape.points()) CHECK(has_mirror(j.shape, p, 1e-9));
    CHECK_FALSE(invariant_violation(j.shape).has_value());
}

TEST_CASE("Joukowski scaling returns the pre-normalization shift and chord") {
    const JoukowskiParams prm{0.1, 0.05, 1.1};
    const auto j = joukowski_airfoil(prm);
    const double c = prm.c_j();
    // The trailing edge cusp is the image of z = c_J, i.e. zeta = 2 c_J.
    CHECK(j.shape[0].x * j.m + j.ell == doctest::Approx(2.0 * c).epsilon(1e-12));
    CHECK(j.shape[0].y == 0.0);
    CHECK(j.m > 4.0);
}

TEST_CASE("every shape on the dataset grids satisfies the shape invariants") {
    std::size_t naca = 0;
    for (int mi = 0; mi <= 18; ++mi) {
        for (int pi = 0; pi <= 10; ++pi) {
            const double m = 0.005 * mi;
            const double p = mi == 0 ? 0.0 : 0.2 + 0.05 * pi;
            if (mi == 0 && pi > 0) continue;
            for (int ti = 0; ti <= 18; ti += 3) {
                const auto s = naca4_profile({m, p, 0.06 + 0.01 * ti});
                const auto v = invariant_violation(s);
                CHECK_MESSAGE(!v.has_value(), v.value_or(""));
                CHECK_FALSE(self_intersects(s.points()));
                ++naca;
            }
        }
    }
    CHECK(naca > 100);

    std::size_t jk = 0;
    for (int ai = 1; ai <= 100; ai += 3) {
        for (int bi = 0; bi <= 200; bi += 7) {
            const auto j = joukowski_airfoil({0.002 * ai, 0.001 * bi, 1.1});
            const auto v = invariant_violation(j.shape);
            CHECK_MESSAGE(!v.has_value(), v.value_or(""));
            ++jk;
        }
    }
    CHECK(jk > 500);
}

TEST_CASE("resample of an already resampled outline is a near identity") {
    const auto shape = naca4_profile({0.04, 0.4, 0.12});
    const auto same = resample(shape.points(), shape.size());
    double err = 0.0;
    for (std::size_t i = 0; i < shape.size(); ++i) {
        err = std::max({err, std::abs(same[i].x - shape[i].x), std::abs(same[i].y - shape[i].y)});
    }
    CHECK(err < 1e-6);
}

TEST_CASE("resample keeps a densely sampled circle round") {
    std::vector<Point2> circle;
    for (int i = 0; i <= 1000; ++i) {
        const double t = 2.0 * std::numbers::pi * i / 1000.0;
        circle.push_back({std::cos(t), std::sin(t)});
    }
    circle.back() = circle.front();
    const auto out = resample(circle, 248);
    CHECK(out.size() == 248);
    double err = 0.0;
    for (const auto& p : out.points()) err = std::max(err, std::abs(std::hypot(p.x, p.y) - 1.0));
    CHECK(err < 1e-5);
    CHECK(out[0] == out[247]);
}

TEST_CASE("resample refuses fewer points than the floor and self-intersecting input") {
    const auto shape = naca4_profile({0.0, 0.0, 0.12});
    CHECK_THROWS_AS(resample(shape.points(), 100), ParameterError);
    const std::vector<Point2> bowtie{{0, 0}, {1, 1}, {1, 0}, {0, 1}, {0, 0}};
    CHECK_THROWS_AS(resample(bowtie, 150), DegenerateShapeError);
}

TEST_CASE("resample changes point count while staying on the outline") {
    const auto coarse = naca4_profile({0.02, 0.4, 0.12}, 248);
    const auto fine = resample(coarse.points(), 400);
    CHECK(fine.size() == 400);
    CHECK(fine[0] == fine[399]);
    CHECK(signed_area(fine.points()) == doctest::Approx(signed_area(coarse.points())).epsilon(1e-3));
}
