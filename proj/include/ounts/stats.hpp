#pragma once

#include <cstddef>
#include <span>

namespace ounts {

struct MeanEstimate {
    double mean = 0.0;
    double std_error = 0.0;
};

MeanEstimate mean_with_se(std::span<const double> x);

// Second and fourth cumulants with standard errors from their influence
// functions (delta method), as used by the cumulant suite.
struct CumulantEstimate {
    double mean = 0.0;
    double c2 = 0.0;
    double c2_se = 0.0;
    double c4 = 0.0;
    double c4_se = 0.0;
    std::size_t n = 0;
};

CumulantEstimate estimate_cumulants(std::span<const double> x);

double sample_skewness(std::span<const double> x);
// Delta-method standard error of sample_skewness under a symmetric null; needs a finite sixth moment.
double sample_skewness_se(std::span<const double> x);
double sample_excess_kurtosis(std::span<const double> x);
double lag1_autocorrelation(std::span<const double> x);

}  // namespace ounts
