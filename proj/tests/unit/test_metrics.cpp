#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "foilgen/error.hpp"
#include "foilgen/metrics.hpp"
#include "foilgen/random.hpp"

using namespace foilgen;
using namespace foilgen::metrics;

namespace {

Eigen::RowVectorXd random_row(Eigen::Index n, Rng& rng) {
    Eigen::RowVectorXd r(n);
    for (Eigen::Index i = 0; i < n; ++i) r(i) = rng.normal();
    return r;
}

std::vector<double> to_vec(const Eigen::RowVectorXd& r) { return {r.data(), r.data() + r.size()}; }

}  // namespace

TEST_CASE("cl_error hand values") {
    const std::vector<double> a{0.5, 1.0};
    CHECK(cl_error(a, a) == 0.0);
    CHECK(cl_error(a, std::vector<double>{0.6, 0.8}) == doctest::Approx(0.025).epsilon(1e-14));
    CHECK_THROWS_AS(cl_error(std::vector<double>{}, std::vector<double>{}), ParameterError);
    CHECK_THROWS_AS(cl_error(a, std::vector<double>{1.0}), ParameterError);
}

TEST_CASE("cl_error permutation invariance and quadratic scaling") {
    Rng rng(5);
    std::vector<double> x(50), y(50);
    for (auto& v : x) v = rng.normal();
    for (auto& v : y) v = rng.normal();
    const double e = cl_error(x, y);
    std::vector<std::size_t> perm(50);
    std::iota(perm.begin(), perm.end(), 0);
    rng.shuffle(perm.begin(), perm.end());
    std::vector<double> px(50), py(50), sx(50), sy(50);
    for (std::size_t i = 0; i < 50; ++i) {
        px[i] = x[perm[i]];
        py[i] = y[perm[i]];
        sx[i] = 4.0 * x[i];
        sy[i] = 4.0 * y[i];
    }
    CHECK(cl_error(px, py) == doctest::Approx(e).epsilon(1e-13));
    CHECK(cl_error(sx, sy) == doctest::Approx(16.0 * e).epsilon(1e-13));
}

TEST_CASE("filter_valid boundary and monotonicity") {
    CHECK(filter_valid(std::vector<double>{0.0, 0.0, 0.0}).size() == 3);
    const auto g = filter_valid(std::vector<double>{0.019, 0.021}, 0.02);
    REQUIRE(g.size() == 1);
    CHECK(g[0] == 0);
    CHECK(filter_valid(std::vector<double>{0.02}, 0.02).size() == 1);
    CHECK(filter_valid(std::vector<double>{std::nan("")}, 1.0).empty());

    Rng rng(8);
    std::vector<double> e(200);
    for (auto& v : e) v = rng.uniform(0.0, 0.05);
    const auto small = filter_valid(e, 0.01);
    const auto large = filter_valid(e, 0.03);
    for (auto i : small) CHECK(std::find(large.begin(), large.end(), i) != large.end());
}

TEST_CASE("shape_variation") {
    Matrix same(4, 6);
    same.rowwise() = Eigen::RowVectorXd::LinSpaced(6, 0.0, 1.0);
    CHECK(shape_variation(same) == doctest::Approx(0.0));

    Rng rng(1);
    const Eigen::RowVectorXd s = random_row(10, rng);
    Eigen::RowVectorXd d = random_row(10, rng);
    d *= 0.2 / d.norm();
    Matrix two(2, 10);
    two.row(0) = s;
    two.row(1) = s + d;
    CHECK(shape_variation(two) == doctest::Approx(0.1).epsilon(1e-12));

    CHECK_THROWS_AS(shape_variation(Matrix(0, 3)), ParameterError);
}

TEST_CASE("shape_variation matches direct recomputation") {
    Rng rng(2);
    const Eigen::RowVectorXd base = random_row(16, rng);
    Matrix set(10, 16);
    for (int r = 0; r < 10; ++r) set.row(r) = base + 0.05 * random_row(16, rng);
    std::vector<double> mean(16, 0.0);
    for (int r = 0; r < 10; ++r) {
        for (int c = 0; c < 16; ++c) mean[c] += set(r, c) / 10.0;
    }
    double sum = 0.0;
    for (int r = 0; r < 10; ++r) {
        double sq = 0.0;
        for (int c = 0; c < 16; ++c) sq += (set(r, c) - mean[c]) * (set(r, c) - mean[c]);
        sum += std::sqrt(sq);
    }
    CHECK(std::abs(shape_variation(set) - sum / 10.0) < 1e-12);
}

TEST_CASE("distances") {
    Rng rng(3);
    const Eigen::RowVectorXd s = random_row(8, rng);
    Eigen::RowVectorXd d = random_row(8, rng);
    d *= 0.3 / d.norm();
    Matrix a(1, 8), b(1, 8);
    a.row(0) = s;
    b.row(0) = s + d;
    CHECK(set_distance(a, b) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(distance_to_set(to_vec(s), a) == 0.0);

    Matrix set(20, 8);
    for (int r = 0; r < 20; ++r) set.row(r) = random_row(8, rng);
    for (int r = 0; r < 20; ++r) CHECK(distance_to_set(to_vec(set.row(r)), set) < 1e-12);
    CHECK(distance_to_set(to_vec(s), set) > 0.0);

    // Triangle inequality on random triples (distance_to_set with a singleton).
    for (int k = 0; k < 20; ++k) {
        const auto x = random_row(8, rng), y = random_row(8, rng), z = random_row(8, rng);
        Matrix ym(1, 8), zm(1, 8);
        ym.row(0) = y;
        zm.row(0) = z;
        const double xy = distance_to_set(to_vec(x), ym);
        const double xz = distance_to_set(to_vec(x), zm);
        const double yz = distance_to_set(to_vec(y), zm);
        CHECK(xz <= xy + yz + 1e-12);
    }

    CHECK_THROWS_AS(distance_to_set(to_vec(s), Matrix(0, 8)), ParameterError);
    CHECK_THROWS_AS(set_distance(a, Matrix(0, 8)), ParameterError);
    CHECK_THROWS_AS(distance_to_set(std::vector<double>(3, 0.0), a), ShapeError);
}

TEST_CASE("histogram counts") {
    const auto h = histogram(std::vector<double>{0.0, 1.0, 2.0}, 0.0, 3.0, 3);
    CHECK(h.counts == std::vector<std::size_t>{1, 1, 1});
    CHECK(h.edges.size() == 4);

    const auto e = histogram(std::vector<double>{}, 0.0, 1.0, 5);
    CHECK(e.counts == std::vector<std::size_t>(5, 0));

    Rng rng(4);
    std::vector<double> v(500);
    for (auto& x : v) x = rng.normal();
    const auto g = histogram(v, -1.0, 1.0, 7);
    CHECK(std::accumulate(g.counts.begin(), g.counts.end(), std::size_t{0}) == v.size());
    CHECK(g.below + g.above > 0);

    CHECK_THROWS_AS(histogram(v, 0.0, 1.0, 0), ParameterError);
}

TEST_CASE("fixed histogram families") {
    const auto d = distance_histogram(std::vector<double>{0.0, 2.49, 3.0});
    CHECK(d.counts.size() == 40);
    CHECK(d.edges.front() == 0.0);
    CHECK(d.edges.back() == 2.5);
    CHECK(d.counts.front() == 1);
    CHECK(d.counts.back() == 2);
    CHECK(d.above == 1);

    const auto w = roundness_histogram(std::vector<double>{1e-9, 1e-7, 0.5, 0.0});
    CHECK(w.log_scale);
    CHECK(w.edges.front() == 1e-8);
    CHECK(w.edges.back() == 1.0);
    CHECK(w.below == 2);
    CHECK(w.counts.front() == 2);
    // 1e-7 lies in the 6th log bin (each bin spans 0.2 decades).
    CHECK(w.counts[5] == 1);
    CHECK(std::accumulate(w.counts.begin(), w.counts.end(), std::size_t{0}) == 4);
}
