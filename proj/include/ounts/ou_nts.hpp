#pragma once

#include <complex>
#include <string>
#include <vector>

#include "ounts/nts.hpp"
#include "ounts/rng.hpp"
#include "ounts/samplers.hpp"

namespace ounts {

// dN(t) = -b N(t) dt + dY(t), N(0) = n0, with Y a symmetric NTS process.
struct OuNtsParams {
    NtsParams nts;
    double b = 1.0;
    double n0 = 0.0;

    void validate() const;
    // Upper bound sqrt(2 beta) / sigma on |s| for the moment generating function.
    double cgf_bound() const;
    bool risk_neutral_feasible() const { return cgf_bound() > 1.0; }
};

OuNtsParams make_ou_nts(double alpha, double b, double sigma, double nu, double n0 = 0.0);

enum class LchRoute { hypergeometric, elementary };

// log E[exp(i u Z(t))] of the transition noise Z(t) = N(t) - e^{-bt} N(0).
// The elementary route is available for alpha = 1/2 only.
double transition_lch(double u, double t, const OuNtsParams& p,
                      LchRoute route = LchRoute::hypergeometric);

// Adaptive quadrature of int_0^t psi_Y(u e^{-bs}) ds.
double transition_lch_oracle(double u, double t, const OuNtsParams& p);

// int_{t0}^{t1} psi_Y(u e^{-bs}) ds for complex u by composite Gauss-Legendre.
std::complex<double> transition_lch_gl(std::complex<double> u, double t0, double t1,
                                       const OuNtsParams& p);

// log E[exp(s Z(t))], |s| < sqrt(2 beta) / sigma.
double transition_cgf(double s, double t, const OuNtsParams& p,
                      LchRoute route = LchRoute::hypergeometric);
double transition_cgf_oracle(double s, double t, const OuNtsParams& p);

// Exact law of Z(dt) = sigma * X * sqrt(M1 + M2): M1 is TS, M2 compound
// Poisson with gamma-mixture jumps.
struct StepDecomposition {
    double dt = 0.0;
    double a = 1.0;          // e^{-b dt}
    double omega = 1.0;      // a^2
    double omega_alpha = 1.0;
    TsLaw m1_law;
    double lambda_omega = 0.0;  // Poisson intensity of the jump count
    double jump_alpha = 0.5;    // gamma shape 1 - alpha
    double jump_beta = 1.0;     // gamma rate is jump_beta * V
    double alpha = 0.5;
};

StepDecomposition step_decomposition(double dt, const OuNtsParams& p);

// Density of one jump J of M2 (by quadrature over the mixing variable).
double jump_density(double x, const StepDecomposition& dec, const OuNtsParams& p);

double sample_increment_exact(RngStream& rng, const StepDecomposition& dec, const OuNtsParams& p);

enum class Scheme { exact, approx1, approx2 };

const char* scheme_name(Scheme s);
Scheme parse_scheme(const std::string& name);

// Approx1 keeps only the TS part M1; Approx2 is the Euler draw sigma sqrt(L) X
// with L ~ TS(alpha, beta, c dt).
double sample_increment_approx(RngStream& rng, double dt, const OuNtsParams& p, Scheme scheme);
double sample_increment_approx(RngStream& rng, const StepDecomposition& dec, const OuNtsParams& p,
                               Scheme scheme);

// k-th cumulant of the BDLP at unit time (zero for odd k).
double bdlp_cumulant(int k, const NtsParams& p);

// k-th cumulant of N(t) given N(0) = n0.
double ou_cumulant(int k, double t, const OuNtsParams& p);

// (true - estimate) / true
double err_pct(double true_value, double estimate);

}  // namespace ounts
