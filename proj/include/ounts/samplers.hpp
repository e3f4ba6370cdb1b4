#pragma once

#include <cstdint>

#include "ounts/rng.hpp"

namespace ounts {

// Tempered stable law TS(alpha, beta, c_mass): Levy density
// c_mass * exp(-beta x) / x^(1 + alpha) on x > 0.
struct TsLaw {
    double alpha = 0.5;
    double beta = 1.0;
    double c_mass = 1.0;

    void validate() const;
    // k-th cumulant c_mass * Gamma(k - alpha) * beta^(alpha - k).
    double cumulant(int k) const;
    // log E[exp(-s X)] for s > -beta.
    double log_laplace(double s) const;
};

double sample_uniform(RngStream& rng);  // open interval (0, 1)
double sample_normal(RngStream& rng);
double sample_exponential(RngStream& rng);
std::uint64_t sample_poisson(RngStream& rng, double lambda);
double sample_gamma(RngStream& rng, double shape, double rate);

// One-sided stable law with E[exp(-s S)] = exp(-s^alpha) (Kanter's method).
double sample_positive_stable(RngStream& rng, double alpha);

// Inverse Gaussian with mean mu and shape lambda (Michael-Schucany-Haas).
double sample_ig(RngStream& rng, double mu, double lambda);

double sample_ts(RngStream& rng, const TsLaw& law);

// Mixing law of the jump rate multiplier V on [1, 1/omega] with density
// proportional to (v^alpha - 1) / v.
double sample_v(RngStream& rng, double omega, double alpha);
double sample_v_acceptance_rate(double omega, double alpha);
double v_density(double v, double omega, double alpha);

}  // namespace ounts
