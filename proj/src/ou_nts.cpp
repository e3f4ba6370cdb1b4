#include "ounts/ou_nts.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "ounts/errors.hpp"
#include "ounts/quadrature.hpp"
#include "ounts/special_functions.hpp"

namespace ounts {

namespace {

// Beyond 2bt = 80 the transition law equals the stationary one to within
// e^{-80} relative, so the upper tempering rate is capped there.
constexpr double kMaxLogDecay = 80.0;

void check_time(double t) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        std::ostringstream msg;
        msg << "time must be positive and finite, got " << t;
        throw DomainError(msg.str());
    }
}

void check_route(LchRoute route, double alpha) {
    if (route == LchRoute::elementary && alpha != 0.5) {
        throw DomainError("the elementary route requires alpha = 1/2");
    }
}

// G(z) - log(z / k) for the characteristic function antiderivative, X = z / k.
double lch_profile(double x, double alpha, LchRoute route) {
    if (route == LchRoute::elementary) {
        const double r = std::sqrt(1.0 + 1.0 / x);
        return 2.0 * std::log1p(r) - 2.0 * r;
    }
    const double g = -std::pow(x, -alpha) * gauss_2f1(-alpha, -alpha, 1.0 - alpha, -x) / alpha;
    return g - std::log(x);
}

// Same for the moment generating function, Y = z / kappa > 1.
double cgf_profile(double y, double alpha, LchRoute route) {
    if (route == LchRoute::elementary) {
        const double r = std::sqrt(1.0 - 1.0 / y);
        return 2.0 * std::log1p(r) - 2.0 * r;
    }
    const double g = std::pow(y, -alpha) * std::pow(y - 1.0, 1.0 + alpha) *
                     gauss_2f1(1.0, 1.0, 1.0 - alpha, y) / alpha;
    return g - std::log(y);
}

// sum_{n>=2} (n-1) x^n / n!  =  1 - e^x + x e^x
double intensity_core(double x) {
    if (std::fabs(x) > 0.5) return -std::expm1(x) + x * std::exp(x);
    double term = x;  // x^n / n! at n = 1
    double sum = 0.0;
    for (int n = 2; n < 60; ++n) {
        term *= x / n;
        const double add = (n - 1) * term;
        sum += add;
        if (std::fabs(add) < 1e-18 * std::fabs(sum)) break;
    }
    return sum;
}

}  // namespace

void OuNtsParams::validate() const {
    nts.validate();
    if (nts.theta != 0.0) {
        throw DomainError("the OU driving process must be symmetric (theta = 0)");
    }
    if (!(b > 0.0) || !std::isfinite(b)) throw DomainError("mean reversion b must be > 0");
    if (!std::isfinite(n0)) throw DomainError("n0 must be finite");
}

double OuNtsParams::cgf_bound() const {
    if (nts.sigma == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0 * nts.beta()) / nts.sigma;
}

OuNtsParams make_ou_nts(double alpha, double b, double sigma, double nu, double n0) {
    OuNtsParams p{NtsParams{alpha, sigma, 0.0, nu}, b, n0};
    p.validate();
    return p;
}

double transition_lch(double u, double t, const OuNtsParams& p, LchRoute route) {
    p.validate();
    check_time(t);
    check_route(route, p.nts.alpha);
    const double k = p.nts.sigma * p.nts.sigma * u * u / 2.0;
    if (k == 0.0) return 0.0;
    const double beta = p.nts.beta();
    const double alpha = p.nts.alpha;
    const double x1 = beta / k;
    const double x2 = x1 * std::exp(std::min(2.0 * p.b * t, kMaxLogDecay));
    const double bracket = lch_profile(x2, alpha, route) - lch_profile(x1, alpha, route);
    return -beta / (2.0 * alpha * p.b) * bracket;
}

double transition_lch_oracle(double u, double t, const OuNtsParams& p) {
    p.validate();
    check_time(t);
    const double k = p.nts.sigma * p.nts.sigma * u * u / 2.0;
    if (k == 0.0) return 0.0;
    const double beta = p.nts.beta();
    const double alpha = p.nts.alpha;
    auto integrand = [&](double s) {
        return -beta / alpha * std::expm1(alpha * std::log1p(k * std::exp(-2.0 * p.b * s) / beta));
    };
    return integrate_adaptive(integrand, 0.0, t, 1e-12).value;
}

std::complex<double> transition_lch_gl(std::complex<double> u, double t0, double t1,
                                       const OuNtsParams& p) {
    static const GaussLegendreRule rule = gauss_legendre(6);
    if (!(t1 >= t0)) throw DomainError("transition_lch_gl needs t1 >= t0");
    if (t1 == t0) return {0.0, 0.0};
    const double width = 0.2 / p.b;
    const int panels = std::max(1, static_cast<int>(std::ceil((t1 - t0) / width)));
    const double h = (t1 - t0) / panels;
    std::complex<double> total(0.0, 0.0);
    for (int j = 0; j < panels; ++j) {
        const double mid = t0 + (j + 0.5) * h;
        for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
            const double s = mid + 0.5 * h * rule.nodes[q];
            total += rule.weights[q] * che_nts(u * std::exp(-p.b * s), p.nts);
        }
    }
    return 0.5 * h * total;
}

double transition_cgf(double s, double t, const OuNtsParams& p, LchRoute route) {
    p.validate();
    check_time(t);
    check_route(route, p.nts.alpha);
    if (!(std::fabs(s) < p.cgf_bound())) {
        std::ostringstream msg;
        msg << "cgf of the OU transition does not exist at s=" << s
            << ": need |s| < sqrt(2 beta)/sigma = " << p.cgf_bound();
        throw DomainError(msg.str());
    }
    const double kappa = p.nts.sigma * p.nts.sigma * s * s / 2.0;
    if (kappa == 0.0) return 0.0;
    const double beta = p.nts.beta();
    const double alpha = p.nts.alpha;
    const double y1 = beta / kappa;
    const double y2 = y1 * std::exp(std::min(2.0 * p.b * t, kMaxLogDecay));
    const double bracket = cgf_profile(y2, alpha, route) - cgf_profile(y1, alpha, route);
    return -beta / (2.0 * alpha * p.b) * bracket;
}

double transition_cgf_oracle(double s, double t, const OuNtsParams& p) {
    p.validate();
    check_time(t);
    if (!(std::fabs(s) < p.cgf_bound())) throw DomainError("cgf does not exist at this s");
    const double kappa = p.nts.sigma * p.nts.sigma * s * s / 2.0;
    if (kappa == 0.0) return 0.0;
    const double beta = p.nts.beta();
    const double alpha = p.nts.alpha;
    auto integrand = [&](double r) {
        return -beta / alpha * std::expm1(alpha * std::log1p(-kappa * std::exp(-2.0 * p.b * r) / beta));
    };
    return integrate_adaptive(integrand, 0.0, t, 1e-13).value;
}

StepDecomposition step_decomposition(double dt, const OuNtsParams& p) {
    p.validate();
    check_time(dt);
    const double alpha = p.nts.alpha;
    const double beta = p.nts.beta();
    StepDecomposition d;
    d.dt = dt;
    d.alpha = alpha;
    d.a = std::exp(-p.b * dt);
    d.omega = d.a * d.a;
    const double x = -2.0 * alpha * p.b * dt;  // alpha * log(omega)
    d.omega_alpha = std::exp(x);
    const double mass = -p.nts.c() * std::expm1(x) / (2.0 * alpha * p.b);
    // Past e^{-745} the tempering rate beta / omega is infinite and M1 vanishes.
    d.m1_law = TsLaw{alpha, d.omega > 0.0 ? beta / d.omega : std::numeric_limits<double>::infinity(),
                     mass};
    d.lambda_omega = beta / (2.0 * p.b * alpha * alpha) * intensity_core(x) * std::exp(-x);
    d.jump_alpha = 1.0 - alpha;
    d.jump_beta = beta;
    return d;
}

double jump_density(double x, const StepDecomposition& dec, const OuNtsParams& p) {
    if (!(x > 0.0)) throw DomainError("jump_density needs x > 0");
    const double alpha = p.nts.alpha;
    const double shape = 1.0 - alpha;
    const double beta = p.nts.beta();
    const double len = -std::log(dec.omega);
    const double wa = dec.omega_alpha;
    const double norm = alpha * wa / intensity_core(alpha * std::log(dec.omega));
    const double lg = log_gamma(shape);
    // y = log v; f_V(v) dv = norm (e^{alpha y} - 1) dy
    auto integrand = [&](double y) {
        const double rate = beta * std::exp(y);
        const double log_pdf = shape * std::log(rate) + (shape - 1.0) * std::log(x) - rate * x - lg;
        return norm * std::expm1(alpha * y) * std::exp(log_pdf);
    };
    return integrate_adaptive(integrand, 0.0, len, 0.0, 1e-13).value;
}

double sample_increment_exact(RngStream& rng, const StepDecomposition& dec, const OuNtsParams& p) {
    double m = 0.0;
    if (dec.m1_law.c_mass > 0.0 && std::isfinite(dec.m1_law.beta)) m = sample_ts(rng, dec.m1_law);
    const std::uint64_t jumps = sample_poisson(rng, dec.lambda_omega);
    for (std::uint64_t i = 0; i < jumps; ++i) {
        const double v = sample_v(rng, dec.omega, dec.alpha);
        m += sample_gamma(rng, dec.jump_alpha, dec.jump_beta * v);
    }
    return p.nts.sigma * sample_normal(rng) * std::sqrt(m);
}

const char* scheme_name(Scheme s) {
    switch (s) {
        case Scheme::exact: return "exact";
        case Scheme::approx1: return "approx1";
        case Scheme::approx2: return "approx2";
    }
    return "?";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "exact") return Scheme::exact;
    if (name == "approx1") return Scheme::approx1;
    if (name == "approx2") return Scheme::approx2;
    throw DomainError("unknown scheme '" + name + "' (expected exact, approx1 or approx2)");
}

double sample_increment_approx(RngStream& rng, const StepDecomposition& dec, const OuNtsParams& p,
                               Scheme scheme) {
    double m = 0.0;
    if (scheme == Scheme::approx1) {
        if (dec.m1_law.c_mass > 0.0 && std::isfinite(dec.m1_law.beta)) m = sample_ts(rng, dec.m1_law);
    } else if (scheme == Scheme::approx2) {
        m = sample_ts(rng, p.nts.subordinator(dec.dt));
    } else {
        throw DomainError("sample_increment_approx handles approx1 and approx2 only");
    }
    return p.nts.sigma * sample_normal(rng) * std::sqrt(m);
}

double sample_increment_approx(RngStream& rng, double dt, const OuNtsParams& p, Scheme scheme) {
    return sample_increment_approx(rng, step_decomposition(dt, p), p, scheme);
}

double bdlp_cumulant(int k, const NtsParams& p) {
    p.validate();
    if (k < 1) throw DomainError("cumulant order must be >= 1");
    if (k % 2 == 1) return 0.0;
    if (p.sigma == 0.0) return 0.0;
    const int n = k / 2;
    const double alpha = p.alpha;
    const double beta = p.beta();
    // C |x|^{-alpha-1/2} K_{alpha+1/2}(A |x|) is the Levy density of the BDLP.
    const double log_c = (alpha / 2.0 + 1.25) * std::log(2.0) - 0.5 * std::log(2.0 * std::numbers::pi) -
                         log_gamma(1.0 - alpha) + (alpha - 0.5) * std::log(p.sigma) +
                         (1.25 - alpha / 2.0) * std::log(beta);
    const double log_a = 0.5 * std::log(2.0 * beta) - std::log(p.sigma);
    const double log_value = log_c + (2.0 * n - alpha - 0.5) * std::log(2.0) +
                             (-2.0 * n + alpha - 0.5) * log_a + log_gamma(n + 0.5) +
                             log_gamma(n - alpha);
    return std::exp(log_value);
}

double ou_cumulant(int k, double t, const OuNtsParams& p) {
    p.validate();
    check_time(t);
    if (k < 1) throw DomainError("cumulant order must be >= 1");
    if (k == 1) return p.n0 * std::exp(-p.b * t);
    if (k % 2 == 1) return 0.0;
    return bdlp_cumulant(k, p.nts) * (-std::expm1(-k * p.b * t)) / (k * p.b);
}

double err_pct(double true_value, double estimate) {
    if (true_value == 0.0) throw DomainError("err_pct is undefined for a zero reference value");
    return (true_value - estimate) / true_value;
}

}  // namespace ounts
