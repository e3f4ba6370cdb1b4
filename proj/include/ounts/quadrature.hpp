#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace ounts {

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
};

// Globally adaptive 31-point Gauss-Kronrod integration on a finite interval.
// Stops when the summed error estimate is below max(abs_tol, rel_tol*|I|).
// Throws NumericalError if the budget of integrand evaluations runs out.
QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol = 0.0,
                                    std::size_t max_evaluations = 1000000);

// Double-exponential rules for integrable endpoint singularities on [a, b]
// and for [a, inf).
QuadratureResult integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                                     double rel_tol = 1e-12);
QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                       double rel_tol = 1e-12);

struct GaussLegendreRule {
    std::vector<double> nodes;    // on [-1, 1]
    std::vector<double> weights;
};

// n-point Gauss-Legendre rule computed by Newton iteration on P_n.
GaussLegendreRule gauss_legendre(int n);

}  // namespace ounts
