#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ounts/market.hpp"

namespace ounts {

struct PriceEstimate {
    double value = 0.0;
    double std_error = 0.0;  // zero for deterministic methods
    std::size_t n_paths = 0;
    std::string method;
    std::uint64_t seed = 0;
};

struct CallStripSpec {
    std::vector<double> fixing_times;  // years, strictly increasing, > 0
    double strike = 0.0;
    void validate() const;
    // Daily fixings (d/365) for d = first_day .. last_day inclusive.
    static CallStripSpec daily(int first_day, int last_day, double strike);
};

struct AsianSpec {
    std::vector<double> fixing_times;
    double strike = 0.0;
    void validate() const;
    // I fixings evenly spaced from t_first to t_last inclusive.
    static AsianSpec evenly_spaced(double t_first, double t_last, int count, double strike);
};

struct SwingSpec {
    std::vector<double> exercise_times;
    int rights = 1;
    double strike = 0.0;
    int basis_degree = 3;
    void validate() const;
    // Daily exercise over the last year [T - 1, T] of a contract maturing at T.
    static SwingSpec final_year_daily(double maturity, int rights, double strike);
};

struct FixingValue {
    double t = 0.0;
    double value = 0.0;
    double std_error = 0.0;
};

struct StripResult {
    PriceEstimate total;
    std::vector<FixingValue> fixings;
};

struct FftSettings {
    double damping = 0.75;
    double eta = 0.25;
    std::size_t min_points = std::size_t{1} << 14;
    std::size_t max_points = std::size_t{1} << 22;
    // Target truncation error relative to F(0, t).
    double tolerance = 1e-7;
    unsigned threads = 0;
};

// Carr-Madan damped-call inversion of log_spot_chf for each fixing.
StripResult price_call_strip_fft(const SpotModel& m, const CallStripSpec& spec,
                                 const FftSettings& settings = {});

// Single European call by FFT; convenience for strike scans.
double price_call_fft(const SpotModel& m, double t, double strike, const FftSettings& settings = {});

StripResult price_call_strip_mc(std::uint64_t seed, const SpotModel& m, const CallStripSpec& spec,
                                std::size_t n_paths, unsigned threads = 0,
                                Scheme scheme = Scheme::exact);

struct AsianResult {
    PriceEstimate call;
    PriceEstimate put;
    double mean_average = 0.0;  // sample mean of the arithmetic average
};

AsianResult price_asian_mc(std::uint64_t seed, const SpotModel& m, const AsianSpec& spec,
                           std::size_t n_paths, unsigned threads = 0);

struct SwingResult {
    PriceEstimate value;
    std::vector<std::string> warnings;
};

SwingResult price_swing_lsmc(std::uint64_t seed, const SpotModel& m, const SwingSpec& spec,
                             std::size_t n_paths, unsigned threads = 0);

}  // namespace ounts
