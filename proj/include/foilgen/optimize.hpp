#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace foilgen::optimize {

struct NelderMeadOptions {
    double f_tol = 1e-12;  // stop when the simplex values spread by less than this
    double x_tol = 1e-8;   // ... and the simplex is this small (relative to |x| + 1)
    std::size_t max_iter = 2000;
};

struct NelderMeadResult {
    std::vector<double> x;
    double f = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

// Downhill simplex with the standard coefficients (reflection 1, expansion 2,
// contraction 1/2, shrink 1/2). Initial simplex is x0 plus x0 + step_i e_i.
// Non-finite objective values are treated as +inf.
NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x0,
                             const std::vector<double>& step, const NelderMeadOptions& opts = {});

}  // namespace foilgen::optimize
