#pragma once

#include <functional>
#include <vector>

namespace ounts {

struct NelderMeadOptions {
    double initial_step = 0.1;  // relative to |x0_i|, or absolute when x0_i == 0
    double f_tol = 1e-10;
    double x_tol = 1e-8;
    int max_evaluations = 20000;
    int restarts = 2;  // fresh simplex around the incumbent after convergence
};

struct OptimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int evaluations = 0;
    bool converged = false;
    double gradient_norm = 0.0;  // central-difference estimate at x
};

// Minimizes f. Non-finite values are treated as +infinity.
OptimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x0, const NelderMeadOptions& opt = {});

// Root of a continuous function with a sign change on [lo, hi].
double find_root(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-14);

}  // namespace ounts
