#include "ounts/quadrature.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "ounts/errors.hpp"

namespace ounts {

namespace {

constexpr unsigned kKronrodPoints = 31;

struct Panel {
    double a, b, value, error;
    bool operator<(const Panel& other) const { return error < other.error; }
};

Panel evaluate_panel(const std::function<double(double)>& f, double a, double b) {
    double err = 0.0;
    const double v =
        boost::math::quadrature::gauss_kronrod<double, kKronrodPoints>::integrate(f, a, b, 0, 0.0, &err);
    // Boost reports the non-recursive error estimate on the reference interval [-1, 1],
    // so it is rescaled here by the half-width.
    return {a, b, v, err * std::fabs(b - a) / 2.0};
}

}  // namespace

QuadratureResult integrate_adaptive(const std::function<double(double)>& f, double a, double b,
                                    double abs_tol, double rel_tol, std::size_t max_evaluations) {
    QuadratureResult out;
    if (a == b) return out;
    std::priority_queue<Panel> heap;
    Panel first = evaluate_panel(f, a, b);
    out.evaluations = kKronrodPoints;
    double total = first.value;
    double total_err = first.error;
    heap.push(first);
    while (total_err > std::max(abs_tol, rel_tol * std::fabs(total))) {
        if (out.evaluations + 2 * kKronrodPoints > max_evaluations) {
            std::ostringstream msg;
            msg << "adaptive quadrature on [" << a << ", " << b << "] stopped after "
                << out.evaluations << " evaluations with error estimate " << total_err;
            throw NumericalError(msg.str());
        }
        Panel worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        Panel left = evaluate_panel(f, worst.a, mid);
        Panel right = evaluate_panel(f, mid, worst.b);
        out.evaluations += 2 * kKronrodPoints;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum to shed the drift of the running updates.
    total = 0.0;
    total_err = 0.0;
    while (!heap.empty()) {
        total += heap.top().value;
        total_err += heap.top().error;
        heap.pop();
    }
    out.value = total;
    out.error = total_err;
    return out;
}

QuadratureResult integrate_tanh_sinh(const std::function<double(double)>& f, double a, double b,
                                     double rel_tol) {
    boost::math::quadrature::tanh_sinh<double> rule;
    QuadratureResult out;
    double l1 = 0.0;
    std::size_t levels = 0;
    out.value = rule.integrate(f, a, b, rel_tol, &out.error, &l1, &levels);
    out.evaluations = levels;
    return out;
}

QuadratureResult integrate_to_infinity(const std::function<double(double)>& f, double a,
                                       double rel_tol) {
    boost::math::quadrature::exp_sinh<double> rule;
    QuadratureResult out;
    double l1 = 0.0;
    std::size_t levels = 0;
    out.value = rule.integrate([&](double x) { return f(a + x); }, 0.0,
                               std::numeric_limits<double>::infinity(), rel_tol, &out.error, &l1,
                               &levels);
    out.evaluations = levels;
    return out;
}

GaussLegendreRule gauss_legendre(int n) {
    if (n < 1) throw DomainError("Gauss-Legendre rule needs n >= 1");
    GaussLegendreRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::fabs(dx) < 1e-16) break;
        }
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

}  // namespace ounts
