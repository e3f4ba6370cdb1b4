#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ounts/nts.hpp"
#include "ounts/ou_nts.hpp"
#include "ounts/rng.hpp"

namespace ounts {

// Daily price series; `days` counts days since 1970-01-01.
struct MarketSeries {
    std::vector<int> days;
    std::vector<double> prices;
    std::vector<bool> trading_day;

    std::size_t size() const { return days.size(); }
    void validate() const;
};

// CSV with header `date,price[,trading_day]`; trading_day accepts 0/1/true/false.
MarketSeries load_market_csv(const std::string& path);
void write_market_csv(const std::string& path, const MarketSeries& s);

// log p(t) = intercept + slope t + amp1 cos(2 pi t + phase1) + amp2 cos(4 pi t + phase2),
// t in years since origin_day.
struct SeasonalityFit {
    int origin_day = 0;
    double intercept = 0.0;
    double slope = 0.0;
    double amp1 = 0.0;
    double phase1 = 0.0;
    double amp2 = 0.0;
    double phase2 = 0.0;

    double log_level(int day) const;
};

struct SeasonalityResult {
    SeasonalityFit fit;
    std::vector<double> residuals;  // log price minus fit, one per input date
};

// Least squares over all dates; needs at least two years of data.
SeasonalityResult fit_seasonality(const MarketSeries& series);

// Replaces non-trading values by chaining simulated increments of the Levy
// factor from the previous value.
MarketSeries fill_non_trading_days(RngStream& rng, const MarketSeries& series, const NtsParams& levy);

// Log density of theta V + sigma sqrt(V) X with V ~ TS(1/2, beta, mass).
double nig_logpdf(double x, double sigma, double theta, double beta, double mass);

struct LevyFit {
    NtsParams params;
    double log_likelihood = 0.0;  // NIG only
    std::string method;           // "mle" or "moments"
    bool converged = true;
    double gradient_norm = 0.0;
    std::size_t n_increments = 0;
};

// Fits (sigma, nu, theta) to the log increments between consecutive trading
// days. alpha = 1/2 uses maximum likelihood; other alpha match the mean,
// variance and fourth cumulant of one-day increments.
LevyFit fit_levy_factor(const MarketSeries& series, double alpha);

// eps_{k+1} = (s - f)_{k+1} - (s - f)_k exp(-b dt), dt = 1/365.
std::vector<double> build_ou_residuals(std::span<const double> spot_log, std::span<const double> ma_log,
                                       double b);

struct OuFit {
    OuNtsParams params;
    double b_regression = 0.0;  // first-stage AR(1) estimate
    double log_likelihood = 0.0;
    bool converged = true;
    double gradient_norm = 0.0;
    std::vector<std::string> warnings;
};

// AR(1) regression for b, Approximation-1 likelihood for (sigma, nu) given b,
// then a joint likelihood refinement over (b, sigma, nu). theta is fixed at 0.
OuFit fit_ou_factor(std::span<const double> spot_log, std::span<const double> ma_log, double alpha = 0.5);

struct CalibrationResult {
    OuNtsParams ou;
    NtsParams levy;
    SeasonalityFit seasonality;        // day-ahead
    SeasonalityFit seasonality_ma;     // month-ahead after filling
    double last_price = 0.0;           // final day-ahead observation
    double levy_log_likelihood = 0.0;
    double ou_log_likelihood = 0.0;
    double b_regression = 0.0;
    double residual_lag1_acf = 0.0;
    double residual_skewness = 0.0;
    double residual_skewness_se = 0.0;
    std::size_t n_residuals = 0;
    std::string levy_method;
    std::vector<std::string> warnings;
};

// Full pipeline. Errors carry the failing stage name in their message.
CalibrationResult calibrate(const MarketSeries& day_ahead, const MarketSeries& month_ahead, double alpha,
                            std::uint64_t seed);

struct SyntheticMarketSpec {
    OuNtsParams ou = make_ou_nts(0.5, 5.0, 0.3, 2.5, 0.0);
    NtsParams levy = make_nts(0.5, 0.25, 0.4, -0.03);
    int days = 1461;
    int start_day = 16801;  // 2016-01-01
    double base = 20.0;
};

struct SyntheticMarket {
    MarketSeries day_ahead;    // every calendar day
    MarketSeries month_ahead;  // weekends flagged non-trading with the Friday price
};

// Two-factor spot with a double-cosine seasonal curve, simulated with the exact scheme.
SyntheticMarket synthesize_market(std::uint64_t seed, const SyntheticMarketSpec& spec = {});

// Round-trip tolerances: b 10%, sigma1 5%, nu1 15%, sigma2 5%, nu2 15%, |theta2 error| 0.02.
struct RoundTripReport {
    double b_rel = 0.0;
    double sigma1_rel = 0.0;
    double nu1_rel = 0.0;
    double sigma2_rel = 0.0;
    double nu2_rel = 0.0;
    double theta2_abs = 0.0;
    bool b_ok = false;
    bool sigma1_ok = false;
    bool nu1_ok = false;
    bool sigma2_ok = false;
    bool nu2_ok = false;
    bool theta2_ok = false;
    bool all_ok() const { return b_ok && sigma1_ok && nu1_ok && sigma2_ok && nu2_ok && theta2_ok; }
};

RoundTripReport check_round_trip(const SyntheticMarketSpec& truth, const CalibrationResult& fit);

}  // namespace ounts
