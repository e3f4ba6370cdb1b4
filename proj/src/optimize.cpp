#include "ounts/optimize.hpp"

#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ounts/errors.hpp"

namespace ounts {

namespace {

double safe_eval(const std::function<double(const std::vector<double>&)>& f, const std::vector<double>& x) {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

double gradient_norm(const std::function<double(const std::vector<double>&)>& f, std::vector<double> x) {
    double sq = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double h = 1e-5 * std::max(1.0, std::fabs(x[i]));
        const double xi = x[i];
        x[i] = xi + h;
        const double up = safe_eval(f, x);
        x[i] = xi - h;
        const double down = safe_eval(f, x);
        x[i] = xi;
        const double g = (up - down) / (2.0 * h);
        if (std::isfinite(g)) sq += g * g;
    }
    return std::sqrt(sq);
}

}  // namespace

OptimizeResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                           std::vector<double> x0, const NelderMeadOptions& opt) {
    const std::size_t n = x0.size();
    if (n == 0) throw DomainError("nelder_mead needs at least one parameter");
    OptimizeResult res;
    res.x = std::move(x0);
    res.value = safe_eval(f, res.x);
    int evals = 1;
    bool converged = false;

    for (int round = 0; round <= opt.restarts; ++round) {
        std::vector<std::vector<double>> pts(n + 1, res.x);
        std::vector<double> vals(n + 1, res.value);
        for (std::size_t i = 0; i < n; ++i) {
            const double step = res.x[i] != 0.0 ? opt.initial_step * std::fabs(res.x[i]) : opt.initial_step;
            pts[i + 1][i] += step;
            vals[i + 1] = safe_eval(f, pts[i + 1]);
            ++evals;
        }
        std::vector<std::size_t> order(n + 1);
        converged = false;
        while (evals < opt.max_evaluations) {
            std::iota(order.begin(), order.end(), 0);
            std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return vals[a] < vals[b]; });
            const std::size_t best = order.front();
            const std::size_t worst = order.back();
            const std::size_t second = order[n - 1];

            double spread = 0.0;
            for (std::size_t k = 0; k <= n; ++k) {
                for (std::size_t i = 0; i < n; ++i) {
                    spread = std::max(spread, std::fabs(pts[k][i] - pts[best][i]) /
                                                  std::max(1.0, std::fabs(pts[best][i])));
                }
            }
            if (std::fabs(vals[worst] - vals[best]) <= opt.f_tol * (1.0 + std::fabs(vals[best])) &&
                spread <= opt.x_tol) {
                converged = true;
                break;
            }

            std::vector<double> centroid(n, 0.0);
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == worst) continue;
                for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[k][i] / static_cast<double>(n);
            }
            auto along = [&](double coef) {
                std::vector<double> p(n);
                for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + coef * (pts[worst][i] - centroid[i]);
                return p;
            };
            std::vector<double> xr = along(-1.0);
            const double fr = safe_eval(f, xr);
            ++evals;
            if (fr < vals[best]) {
                std::vector<double> xe = along(-2.0);
                const double fe = safe_eval(f, xe);
                ++evals;
                if (fe < fr) {
                    pts[worst] = std::move(xe);
                    vals[worst] = fe;
                } else {
                    pts[worst] = std::move(xr);
                    vals[worst] = fr;
                }
                continue;
            }
            if (fr < vals[second]) {
                pts[worst] = std::move(xr);
                vals[worst] = fr;
                continue;
            }
            const bool outside = fr < vals[worst];
            std::vector<double> xc = along(outside ? -0.5 : 0.5);
            const double fc = safe_eval(f, xc);
            ++evals;
            if (fc < (outside ? fr : vals[worst])) {
                pts[worst] = std::move(xc);
                vals[worst] = fc;
                continue;
            }
            for (std::size_t k = 0; k <= n; ++k) {
                if (k == best) continue;
                for (std::size_t i = 0; i < n; ++i) pts[k][i] = pts[best][i] + 0.5 * (pts[k][i] - pts[best][i]);
                vals[k] = safe_eval(f, pts[k]);
                ++evals;
            }
        }
        const auto it = std::min_element(vals.begin(), vals.end());
        const std::size_t b = static_cast<std::size_t>(it - vals.begin());
        const bool improved = vals[b] < res.value - opt.f_tol * (1.0 + std::fabs(res.value));
        if (vals[b] <= res.value) {
            res.x = pts[b];
            res.value = vals[b];
        }
        if (!converged || (round > 0 && !improved)) break;
    }
    res.evaluations = evals;
    res.converged = converged && std::isfinite(res.value);
    res.gradient_norm = gradient_norm(f, res.x);
    return res;
}

double find_root(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if ((flo > 0.0) == (fhi > 0.0)) throw NumericalError("find_root: no sign change on the bracket");
    std::uintmax_t iters = 200;
    auto stop = [tol](double a, double b) { return std::fabs(b - a) <= tol * std::max(1.0, std::fabs(a)); };
    const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, stop, iters);
    return 0.5 * (r.first + r.second);
}

}  // namespace ounts
