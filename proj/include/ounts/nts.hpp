#pragma once

#include <complex>

#include "ounts/samplers.hpp"

namespace ounts {

// Normal tempered stable law Y = theta L + sigma W(L), where L is a TS
// subordinator normalised to E[L(1)] = 1 and Var L(1) = nu.
struct NtsParams {
    double alpha = 0.5;
    double sigma = 0.0;
    double theta = 0.0;
    double nu = 1.0;

    void validate() const;
    double beta() const { return (1.0 - alpha) / nu; }
    double c() const;
    // Law of the subordinator increment over a period of length t.
    TsLaw subordinator(double t) const { return {alpha, beta(), c() * t}; }
};

NtsParams make_nts(double alpha, double sigma, double nu, double theta = 0.0);

// Characteristic exponent psi_Y(u) with E[exp(i u Y(1))] = exp(psi_Y(u)).
std::complex<double> che_nts(std::complex<double> u, const NtsParams& p);
inline std::complex<double> che_nts(double u, const NtsParams& p) {
    return che_nts(std::complex<double>(u, 0.0), p);
}

// log E[exp(s Y(1))]; throws DomainError when the exponential moment is infinite.
double nts_cumulant_exponent(double s, const NtsParams& p);
bool nts_exp_moment_exists(double s, const NtsParams& p);

// k-th cumulant of Y(t), k in 1..4.
double nts_cumulant(int k, double t, const NtsParams& p);

}  // namespace ounts
