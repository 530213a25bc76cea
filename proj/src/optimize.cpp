#include "foilgen/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "foilgen/error.hpp"

namespace foilgen::optimize {

NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const std::vector<double>& step, const NelderMeadOptions& opts) {
    const std::size_t dim = x0.size();
    if (dim == 0 || step.size() != dim) throw ParameterError("nelder_mead: start point and step sizes disagree");

    auto eval = [&](const std::vector<double>& x) {
        const double v = f(x);
        return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
    };

    std::vector<std::vector<double>> simplex(dim + 1, x0);
    for (std::size_t i = 0; i < dim; ++i) simplex[i + 1][i] += step[i];
    std::vector<double> values(dim + 1);
    for (std::size_t i = 0; i <= dim; ++i) values[i] = eval(simplex[i]);

    std::vector<std::size_t> order(dim + 1);
    std::vector<double> centroid(dim), trial(dim), trial2(dim);
    auto along = [&](double t, std::vector<double>& out) {
        // out = centroid + t * (centroid - worst)
        const auto& worst = simplex[order[dim]];
        for (std::size_t j = 0; j < dim; ++j) out[j] = centroid[j] + t * (centroid[j] - worst[j]);
    };

    NelderMeadResult res;
    for (res.iterations = 0; res.iterations < opts.max_iter; ++res.iterations) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

        const double fbest = values[order[0]];
        const double fworst = values[order[dim]];
        double size = 0.0;
        for (std::size_t i = 1; i <= dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) {
                const double ref = std::abs(simplex[order[0]][j]) + 1.0;
                size = std::max(size, std::abs(simplex[order[i]][j] - simplex[order[0]][j]) / ref);
            }
        }
        if (std::isfinite(fworst) && fworst - fbest <= opts.f_tol && size <= opts.x_tol) {
            res.converged = true;
            break;
        }

        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i < dim; ++i) {
            for (std::size_t j = 0; j < dim; ++j) centroid[j] += simplex[order[i]][j] / static_cast<double>(dim);
        }

        along(1.0, trial);
        const double fr = eval(trial);
        const std::size_t w = order[dim];
        if (fr < fbest) {
            along(2.0, trial2);
            const double fe = eval(trial2);
            if (fe < fr) {
                simplex[w] = trial2;
                values[w] = fe;
            } else {
                simplex[w] = trial;
                values[w] = fr;
            }
            continue;
        }
        if (fr < values[order[dim - 1]]) {
            simplex[w] = trial;
            values[w] = fr;
            continue;
        }
        const bool outside = fr < fworst;
        along(outside ? 0.5 : -0.5, trial2);
        const double fc = eval(trial2);
        if (fc < (outside ? fr : fworst)) {
            simplex[w] = trial2;
            values[w] = fc;
            continue;
        }
        const auto best = simplex[order[0]];
        for (std::size_t i = 1; i <= dim; ++i) {
            auto& p = simplex[order[i]];
            for (std::size_t j = 0; j < dim; ++j) p[j] = best[j] + 0.5 * (p[j] - best[j]);
            values[order[i]] = eval(p);
        }
    }

    const auto it = std::min_element(values.begin(), values.end());
    res.x = simplex[static_cast<std::size_t>(it - values.begin())];
    res.f = *it;
    return res;
}

}  // namespace foilgen::optimize
