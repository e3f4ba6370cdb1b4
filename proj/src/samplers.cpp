#include "ounts/samplers.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ounts/errors.hpp"
#include "ounts/special_functions.hpp"

namespace ounts {

void TsLaw::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("TS law needs alpha in (0,1)");
    if (!(beta > 0.0)) throw DomainError("TS law needs beta > 0");
    if (!(c_mass >= 0.0) || !std::isfinite(c_mass)) throw DomainError("TS law needs c_mass >= 0");
}

double TsLaw::cumulant(int k) const {
    if (k < 1) throw DomainError("cumulant order must be positive");
    return c_mass * std::exp(log_gamma(k - alpha) + (alpha - k) * std::log(beta));
}

double TsLaw::log_laplace(double s) const {
    const double kappa = c_mass * std::exp(log_gamma(1.0 - alpha)) / alpha;
    return -kappa * (std::pow(beta + s, alpha) - std::pow(beta, alpha));
}

double sample_uniform(RngStream& rng) {
    return (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double sample_normal(RngStream& rng) {
    if (rng.has_spare_normal) {
        rng.has_spare_normal = false;
        return rng.spare_normal;
    }
    double x, y, s;
    do {
        x = 2.0 * sample_uniform(rng) - 1.0;
        y = 2.0 * sample_uniform(rng) - 1.0;
        s = x * x + y * y;
    } while (s >= 1.0 || s == 0.0);
    const double scale = std::sqrt(-2.0 * std::log(s) / s);
    rng.spare_normal = y * scale;
    rng.has_spare_normal = true;
    return x * scale;
}

double sample_exponential(RngStream& rng) { return -std::log(sample_uniform(rng)); }

std::uint64_t sample_poisson(RngStream& rng, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("Poisson rate must be >= 0");
    if (lambda == 0.0) return 0;
    if (lambda < 10.0) {
        double p = std::exp(-lambda);
        double cdf = p;
        const double u = sample_uniform(rng);
        std::uint64_t k = 0;
        while (u > cdf && k < 1000) {
            ++k;
            p *= lambda / static_cast<double>(k);
            cdf += p;
        }
        return k;
    }
    // Transformed rejection with squeeze (Hormann 1993, PTRS).
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = sample_uniform(rng) - 0.5;
        const double v = sample_uniform(rng);
        const double us = 0.5 - std::fabs(u);
        const double k = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(k);
        if (k < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -lambda + k * loglam - log_gamma(k + 1.0)) {
            return static_cast<std::uint64_t>(k);
        }
    }
}

double sample_gamma(RngStream& rng, double shape, double rate) {
    if (!(shape > 0.0) || !(rate > 0.0)) throw DomainError("gamma needs shape > 0 and rate > 0");
    if (shape < 1.0) {
        const double boost = std::exp(std::log(sample_uniform(rng)) / shape);
        return sample_gamma(rng, shape + 1.0, rate) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        const double x = sample_normal(rng);
        double v = 1.0 + c * x;
        if (v <= 0.0) continue;
        v = v * v * v;
        const double u = sample_uniform(rng);
        const double x2 = x * x;
        if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
        if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
    }
}

double sample_positive_stable(RngStream& rng, double alpha) {
    const double u = std::numbers::pi * sample_uniform(rng);
    const double e = sample_exponential(rng);
    const double log_s = (std::log(std::sin(alpha * u)) - std::log(std::sin(u))) / alpha +
                         (1.0 - alpha) / alpha *
                             (std::log(std::sin((1.0 - alpha) * u)) - std::log(std::sin(alpha * u)) - std::log(e));
    return std::exp(log_s);
}

double sample_ig(RngStream& rng, double mu, double lambda) {
    if (!(mu > 0.0) || !(lambda > 0.0)) throw DomainError("inverse Gaussian needs mu, lambda > 0");
    const double n = sample_normal(rng);
    const double r = mu * n * n / (2.0 * lambda);
    const double x = mu / (1.0 + r + std::sqrt(r * (2.0 + r)));
    if (sample_uniform(rng) * (mu + x) <= mu) return x;
    return mu * mu / x;
}

double sample_ts(RngStream& rng, const TsLaw& law) {
    law.validate();
    if (law.c_mass == 0.0) return 0.0;
    if (law.alpha == 0.5) {
        const double m = law.c_mass;
        return sample_ig(rng, m * std::sqrt(std::numbers::pi / law.beta),
                         2.0 * std::numbers::pi * m * m);
    }
    // kappa s^alpha is the Laplace exponent of the untempered stable part.
    const double kappa = law.c_mass * std::exp(log_gamma(1.0 - law.alpha)) / law.alpha;
    const double lambda = kappa * std::pow(law.beta, law.alpha);
    const double pieces = std::max(1.0, std::ceil(lambda));
    const double scale = std::pow(kappa / pieces, 1.0 / law.alpha);
    double total = 0.0;
    for (double i = 0; i < pieces; i += 1.0) {
        for (;;) {
            const double x = scale * sample_positive_stable(rng, law.alpha);
            if (sample_uniform(rng) <= std::exp(-law.beta * x)) {
                total += x;
                break;
            }
        }
    }
    return total;
}

namespace {

void check_v_args(double omega, double alpha) {
    if (!(omega > 0.0 && omega < 1.0)) {
        std::ostringstream msg;
        msg << "sample_v needs omega in (0,1), got " << omega;
        throw DomainError(msg.str());
    }
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("sample_v needs alpha in (0,1)");
}

}  // namespace

double v_density(double v, double omega, double alpha) {
    check_v_args(omega, alpha);
    if (v < 1.0 || v > 1.0 / omega) return 0.0;
    const double x = -alpha * std::log(omega);
    // 1 - e^{-x} (1 + x), summed as a series when x is small to avoid cancellation
    double denom = 0.0;
    if (x < 0.1) {
        double term = x;
        for (int k = 2; k < 20; ++k) {
            term *= -x / k;
            denom += (k - 1) * term;
        }
        denom = -denom;
    } else {
        denom = -std::expm1(-x) - x * std::exp(-x);
    }
    return alpha * std::exp(-x) / denom * std::expm1(alpha * std::log(v)) / v;
}

double sample_v_acceptance_rate(double omega, double alpha) {
    check_v_args(omega, alpha);
    const double len = -std::log(omega);
    const double al = alpha * len;
    const double mass = std::expm1(al) / alpha - len;  // integral of e^{ay}-1 over [0,L]
    if (al <= 1.0) return mass / (len * std::expm1(al) / 2.0);
    return mass / (std::expm1(al) / alpha);
}

double sample_v(RngStream& rng, double omega, double alpha) {
    check_v_args(omega, alpha);
    // y = log v has density proportional to e^{alpha y} - 1 on [0, L].
    const double len = -std::log(omega);
    const double al = alpha * len;
    if (al <= 1.0) {
        const double top = std::expm1(al) / len;
        for (;;) {
            const double y = len * std::sqrt(sample_uniform(rng));
            if (sample_uniform(rng) * top * y <= std::expm1(alpha * y)) return std::min(std::exp(y), 1.0 / omega);
        }
    }
    const double span = std::expm1(al);
    for (;;) {
        const double y = std::log1p(sample_uniform(rng) * span) / alpha;
        if (sample_uniform(rng) <= -std::expm1(-alpha * y)) return std::min(std::exp(y), 1.0 / omega);
    }
}

}  // namespace ounts
