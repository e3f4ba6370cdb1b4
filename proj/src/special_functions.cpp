#include "ounts/special_functions.hpp"

#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <numbers>
#include <sstream>

#include "ounts/errors.hpp"

namespace ounts {

namespace {

constexpr double kSeriesTol = 1e-17;
constexpr int kMaxTerms = 100000;

[[noreturn]] void no_convergence(const char* what) {
    throw NumericalError(std::string("2F1 series did not converge: ") + what);
}

bool close(double x, double y) { return std::fabs(x - y) <= 1e-12 * (1.0 + std::fabs(y)); }

// Gamma(1 - alpha) * Gamma(1 + alpha) = pi alpha / sin(pi alpha)
double reflection_product(double alpha) {
    const double pa = std::numbers::pi * alpha;
    return pa / std::sin(pa);
}

// 2F1(1, 1; 2 + alpha; y) for y <= 0.5.
double f11(double alpha, double y) {
    if (std::fabs(y) <= 0.5) {
        double term = 1.0;
        double sum = 1.0;
        for (int n = 0; n < kMaxTerms; ++n) {
            term *= (n + 1.0) / (n + 2.0 + alpha) * y;
            sum += term;
            if (std::fabs(term) <= kSeriesTol * std::fabs(sum)) return sum;
        }
        no_convergence("F(1,1;2+a;y) direct");
    }
    // Pfaff: (1 - y)^-1 F(1, 1 + alpha; 2 + alpha; y / (y - 1))
    const double one_minus_y = 1.0 - y;
    const double omw = 1.0 / one_minus_y;
    return omw * hyp2f1_unit_kernel(1.0 + alpha, -y / one_minus_y, omw);
}

double pattern_a(double alpha, double x) {
    if (x == 0.0) return 1.0;
    if (x > 1.0) {
        std::ostringstream msg;
        msg << "2F1(-a,-a;1-a;x) is only supported for x <= 1, got x=" << x;
        throw DomainError(msg.str());
    }
    if (x == 1.0) return reflection_product(alpha);
    if (std::fabs(x) <= 0.5) {
        double term = 1.0;
        double sum = 1.0;
        for (int n = 0; n < kMaxTerms; ++n) {
            const double na = n - alpha;
            term *= na * na / ((n + 1.0 - alpha) * (n + 1.0)) * x;
            sum += term;
            if (std::fabs(term) <= kSeriesTol * std::fabs(sum)) return sum;
        }
        no_convergence("pattern A direct");
    }
    if (x < 0.0) {
        const double one_minus_x = 1.0 - x;
        const double omw = 1.0 / one_minus_x;
        return std::pow(one_minus_x, alpha) * hyp2f1_unit_kernel(-alpha, -x / one_minus_x, omw);
    }
    // 0.5 < x < 1: connection formula around x = 1
    const double y = 1.0 - x;
    return reflection_product(alpha) * std::pow(x, alpha) +
           alpha / (1.0 + alpha) * std::pow(y, 1.0 + alpha) * f11(alpha, y);
}

double pattern_b(double alpha, double x) {
    if (x == 0.0) return 1.0;
    if (x == 1.0) throw DomainError("2F1(1,1;1-a;x) diverges at x=1");
    if (std::fabs(x) <= 0.5) {
        double term = 1.0;
        double sum = 1.0;
        for (int n = 0; n < kMaxTerms; ++n) {
            term *= (n + 1.0) / (n + 1.0 - alpha) * x;
            sum += term;
            if (std::fabs(term) <= kSeriesTol * std::fabs(sum)) return sum;
        }
        no_convergence("pattern B direct");
    }
    if (x < 0.0) {
        const double one_minus_x = 1.0 - x;
        const double omw = 1.0 / one_minus_x;
        return omw * hyp2f1_unit_kernel(-alpha, -x / one_minus_x, omw);
    }
    const double y = 1.0 - x;
    const double regular = alpha / (1.0 + alpha) * f11(alpha, y);
    if (x < 1.0) {
        return regular + reflection_product(alpha) * std::pow(x, alpha) * std::pow(y, -1.0 - alpha);
    }
    // x > 1: (1 - x)^(-1-alpha) has phase exp(-i pi (1 + alpha)); keep the real part.
    return regular - reflection_product(alpha) * std::cos(std::numbers::pi * alpha) *
                         std::pow(x, alpha) * std::pow(x - 1.0, -1.0 - alpha);
}

}  // namespace

double hyp2f1_unit_kernel(double b, double w, double one_minus_w) {
    // w may round to 1 for very large |x|; the logarithmic branch only reads one_minus_w.
    if (!(w >= 0.0 && w <= 1.0 && one_minus_w > 0.0)) throw DomainError("unit kernel requires 0 <= w < 1");
    if (w <= 0.5) {
        double pw = 1.0;
        double sum = 0.0;
        for (int n = 0; n < kMaxTerms; ++n) {
            const double term = pw / (n + b);
            sum += term;
            if (std::fabs(term) <= kSeriesTol * std::fabs(sum)) return b * sum;
            pw *= w;
        }
        no_convergence("unit kernel direct");
    }
    // Degenerate (c = a + b) expansion around w = 1.
    const double log_omw = std::log(one_minus_w);
    double coef = 1.0;  // (b)_n / n!
    double psi_n1 = boost::math::digamma(1.0);
    double psi_nb = boost::math::digamma(b);
    double pw = 1.0;
    double sum = 0.0;
    for (int n = 0; n < kMaxTerms; ++n) {
        const double term = coef * (psi_n1 - psi_nb - log_omw) * pw;
        sum += term;
        if (n > 1 && std::fabs(term) <= kSeriesTol * std::fabs(sum)) return b * sum;
        coef *= (n + b) / (n + 1.0);
        psi_n1 += 1.0 / (n + 1.0);
        psi_nb += 1.0 / (n + b);
        pw *= one_minus_w;
    }
    no_convergence("unit kernel logarithmic");
}

double gauss_2f1(double a, double b, double c, double x) {
    if (!std::isfinite(x)) throw DomainError("2F1 argument must be finite");
    if (a < 0.0 && a > -1.0 && close(b, a) && close(c, 1.0 + a)) {
        return pattern_a(-a, x);
    }
    if (a == 1.0 && b == 1.0 && c > 0.0 && c < 1.0) {
        return pattern_b(1.0 - c, x);
    }
    if (c <= 0.0 && c == std::floor(c)) {
        throw DomainError("2F1 pole: c is a nonpositive integer");
    }
    std::ostringstream msg;
    msg << "2F1 parameters (" << a << ", " << b << ", " << c
        << ") are outside the supported families (-a,-a,1-a) and (1,1,1-a)";
    throw DomainError(msg.str());
}

double bessel_k(double order, double x) {
    if (!(x > 0.0)) throw DomainError("bessel_k requires x > 0");
    return boost::math::cyl_bessel_k(std::fabs(order), x);
}

double log_bessel_k(double order, double x) {
    if (!(x > 0.0)) throw DomainError("log_bessel_k requires x > 0");
    const double nu = std::fabs(order);
    if (x < 500.0) return std::log(boost::math::cyl_bessel_k(nu, x));
    // Hankel asymptotic expansion; at x >= 500 a handful of terms reach
    // double precision for the small orders used here.
    const double mu = 4.0 * nu * nu;
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k < 30; ++k) {
        const double odd = 2.0 * k - 1.0;
        term *= (mu - odd * odd) / (k * 8.0 * x);
        sum += term;
        if (std::fabs(term) < 1e-17 * std::fabs(sum)) break;
    }
    return -x + 0.5 * std::log(std::numbers::pi / (2.0 * x)) + std::log(sum);
}

double log_gamma(double x) {
    if (!(x > 0.0)) throw DomainError("log_gamma requires x > 0");
    return boost::math::lgamma(x);
}

double digamma(double x) { return boost::math::digamma(x); }

}  // namespace ounts
