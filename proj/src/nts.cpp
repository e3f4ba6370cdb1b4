#include "ounts/nts.hpp"

#include <cmath>
#include <sstream>

#include "ounts/errors.hpp"
#include "ounts/special_functions.hpp"

namespace ounts {

namespace {

std::complex<double> log1p_c(std::complex<double> z) {
    const double x = z.real();
    const double y = z.imag();
    return {0.5 * std::log1p(x * (2.0 + x) + y * y), std::atan2(y, 1.0 + x)};
}

std::complex<double> expm1_c(std::complex<double> z) {
    const double x = z.real();
    const double y = z.imag();
    const double half_sin = std::sin(0.5 * y);
    return {std::expm1(x) * std::cos(y) - 2.0 * half_sin * half_sin, std::exp(x) * std::sin(y)};
}

}  // namespace

void NtsParams::validate() const {
    if (!(alpha > 0.0 && alpha < 1.0)) {
        std::ostringstream msg;
        msg << "alpha must lie in (0,1), got " << alpha;
        throw DomainError(msg.str());
    }
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw DomainError("sigma must be >= 0");
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("nu must be > 0");
    if (!std::isfinite(theta)) throw DomainError("theta must be finite");
}

double NtsParams::c() const {
    return std::exp((1.0 - alpha) * std::log(beta()) - log_gamma(1.0 - alpha));
}

NtsParams make_nts(double alpha, double sigma, double nu, double theta) {
    NtsParams p{alpha, sigma, theta, nu};
    p.validate();
    return p;
}

std::complex<double> che_nts(std::complex<double> u, const NtsParams& p) {
    const double beta = p.beta();
    const std::complex<double> i(0.0, 1.0);
    const std::complex<double> x = (u * u * (p.sigma * p.sigma / 2.0) - i * p.theta * u) / beta;
    // 1 - (1 + x)^alpha, written to keep precision for small |x|
    const std::complex<double> one_minus = -expm1_c(p.alpha * log1p_c(x));
    return beta / p.alpha * one_minus;
}

bool nts_exp_moment_exists(double s, const NtsParams& p) {
    return p.nu * (p.sigma * p.sigma * s * s / 2.0 + p.theta * s) < 1.0 - p.alpha;
}

double nts_cumulant_exponent(double s, const NtsParams& p) {
    if (!nts_exp_moment_exists(s, p)) {
        std::ostringstream msg;
        msg << "exponential moment of order " << s << " does not exist: nu*(sigma^2 s^2/2 + theta s) = "
            << p.nu * (p.sigma * p.sigma * s * s / 2.0 + p.theta * s) << " >= 1 - alpha = " << 1.0 - p.alpha;
        throw DomainError(msg.str());
    }
    const double x = -(p.sigma * p.sigma * s * s / 2.0 + p.theta * s) / p.beta();
    return -p.beta() / p.alpha * std::expm1(p.alpha * std::log1p(x));
}

double nts_cumulant(int k, double t, const NtsParams& p) {
    // cumulants of L(t): t * Gamma(n - alpha) / Gamma(1 - alpha) * beta^(1 - n)
    auto kl = [&](int n) {
        return t * std::exp(log_gamma(n - p.alpha) - log_gamma(1.0 - p.alpha) +
                            (1.0 - n) * std::log(p.beta()));
    };
    const double s2 = p.sigma * p.sigma;
    const double th = p.theta;
    switch (k) {
        case 1: return th * t;
        case 2: return s2 * kl(1) + th * th * kl(2);
        case 3: return 3.0 * th * s2 * kl(2) + th * th * th * kl(3);
        case 4: return 3.0 * s2 * s2 * kl(2) + 6.0 * th * th * s2 * kl(3) + th * th * th * th * kl(4);
        default: throw DomainError("nts_cumulant supports orders 1 to 4");
    }
}

}  // namespace ounts
