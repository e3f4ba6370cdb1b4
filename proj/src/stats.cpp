#include "ounts/stats.hpp"

#include <algorithm>
#include <cmath>

#include "ounts/errors.hpp"

namespace ounts {

namespace {

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

void need(std::span<const double> x, std::size_t n) {
    if (x.size() < n) throw DomainError("not enough observations for the requested statistic");
}

}  // namespace

MeanEstimate mean_with_se(std::span<const double> x) {
    need(x, 2);
    const double m = mean_of(x);
    double ss = 0.0;
    for (double v : x) ss += (v - m) * (v - m);
    const double n = static_cast<double>(x.size());
    return {m, std::sqrt(ss / (n - 1.0) / n)};
}

CumulantEstimate estimate_cumulants(std::span<const double> x) {
    need(x, 4);
    const double n = static_cast<double>(x.size());
    const double mu = mean_of(x);
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d = v - mu;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= n;
    m3 /= n;
    m4 /= n;
    CumulantEstimate out;
    out.n = x.size();
    out.mean = mu;
    out.c2 = m2;
    out.c4 = m4 - 3.0 * m2 * m2;
    double v2 = 0.0, v4 = 0.0;
    for (double v : x) {
        const double d = v - mu;
        const double d2 = d * d;
        const double if2 = d2 - m2;
        const double if4 = (d2 * d2 - m4 - 4.0 * m3 * d) - 6.0 * m2 * if2;
        v2 += if2 * if2;
        v4 += if4 * if4;
    }
    out.c2_se = std::sqrt(v2 / (n - 1.0) / n);
    out.c4_se = std::sqrt(v4 / (n - 1.0) / n);
    return out;
}

double sample_skewness(std::span<const double> x) {
    need(x, 3);
    const double mu = mean_of(x);
    double m2 = 0.0, m3 = 0.0;
    for (double v : x) {
        const double d = v - mu;
        m2 += d * d;
        m3 += d * d * d;
    }
    const double n = static_cast<double>(x.size());
    m2 /= n;
    m3 /= n;
    return m3 / std::pow(m2, 1.5);
}

double sample_skewness_se(std::span<const double> x) {
    need(x, 3);
    const double mu = mean_of(x);
    const double n = static_cast<double>(x.size());
    double m2 = 0.0, m4 = 0.0, m6 = 0.0;
    for (double v : x) {
        const double d2 = (v - mu) * (v - mu);
        m2 += d2;
        m4 += d2 * d2;
        m6 += d2 * d2 * d2;
    }
    m2 /= n;
    m4 /= n;
    m6 /= n;
    // Delta-method variance under a symmetric null, where the third moment vanishes.
    const double var = (m6 - 6.0 * m4 * m2 + 9.0 * m2 * m2 * m2) / (m2 * m2 * m2);
    return std::sqrt(std::max(var, 0.0) / n);
}

double sample_excess_kurtosis(std::span<const double> x) {
    need(x, 4);
    const double mu = mean_of(x);
    double m2 = 0.0, m4 = 0.0;
    for (double v : x) {
        const double d2 = (v - mu) * (v - mu);
        m2 += d2;
        m4 += d2 * d2;
    }
    const double n = static_cast<double>(x.size());
    m2 /= n;
    m4 /= n;
    return m4 / (m2 * m2) - 3.0;
}

double lag1_autocorrelation(std::span<const double> x) {
    need(x, 3);
    const double mu = mean_of(x);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - mu;
        den += d * d;
        if (i + 1 < x.size()) num += d * (x[i + 1] - mu);
    }
    return num / den;
}

}  // namespace ounts
