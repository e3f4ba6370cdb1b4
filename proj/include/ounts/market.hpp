#pragma once

#include <complex>
#include <memory>
#include <span>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ounts/nts.hpp"
#include "ounts/ou_nts.hpp"
#include "ounts/simulation.hpp"

namespace ounts {

// Forward curve F(0, t) with piecewise-constant daily values. Day d covers
// t in [d/365, (d+1)/365); days after the last quote reuse the last value.
class ForwardCurve {
public:
    ForwardCurve() = default;
    ForwardCurve(std::vector<int> day_offsets, std::vector<double> values);

    static ForwardCurve flat(double value);
    // CSV with header `date,price`; the first date is t = 0.
    static ForwardCurve load_csv(const std::string& path);

    double at(double t) const;
    bool empty() const { return values_.empty(); }
    const std::vector<int>& day_offsets() const { return days_; }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<int> days_;
    std::vector<double> values_;
};

// One-factor spot model S = F(0,t) exp(h1(t) + N1(t)); with `levy` set the
// two-factor model S = F(0,t) exp(h1 + N1 + h2 + N2) with N2 an independent
// NTS process.
struct SpotModel {
    ForwardCurve curve;
    OuNtsParams ou;
    std::optional<NtsParams> levy;
    double rate = 0.0;  // continuously compounded, used only for discounting

    static SpotModel one_factor(ForwardCurve curve, OuNtsParams ou, double rate = 0.0);
    static SpotModel two_factor(ForwardCurve curve, OuNtsParams ou, NtsParams levy,
                                double rate = 0.0);

    bool two_factor() const { return levy.has_value(); }
    void validate() const;
    // Largest s with finite E[S(t)^s]; the factors' moment bounds combined.
    double moment_bound() const;
};

// h1(t) = -n0 e^{-bt} - m_Z(1, t). The route-free overload uses the
// elementary logarithmic form when alpha = 1/2.
double rn_drift_one_factor(double t, const OuNtsParams& ou, LchRoute route);
double rn_drift_one_factor(double t, const OuNtsParams& ou);

// h2(t) = -t log E[exp(Y(1))]
double rn_drift_levy(double t, const NtsParams& p);

// Total drift h(t) of log S(t) - log F(0, t).
double rn_drift(double t, const SpotModel& m);

// Row-major n_paths x grid.size() matrix.
struct PathMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
    std::span<const double> row(std::size_t i) const { return {data.data() + i * cols, cols}; }
};

// Generates spot paths one at a time. Path i draws the OU factor from
// RngStream(seed, i, 0) and the Levy factor from lane 1, so switching the
// second factor off leaves N1 untouched.
class SpotPathGenerator {
public:
    SpotPathGenerator(const PathGrid& grid, const SpotModel& m, Scheme scheme);
    ~SpotPathGenerator();
    SpotPathGenerator(SpotPathGenerator&&) noexcept;

    // Writes S(t_0..t_M) into out.
    void spot(std::uint64_t seed, std::uint64_t path_id, std::span<double> out) const;
    // Writes the factors; n2 must be empty for one-factor models.
    void factors(std::uint64_t seed, std::uint64_t path_id, std::span<double> n1,
                 std::span<double> n2) const;

    const PathGrid& grid() const;
    bool two_factor() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

PathMatrix spot_paths(std::uint64_t seed, const PathGrid& grid, const SpotModel& m, Scheme scheme,
                      std::size_t n_paths, unsigned threads = 0);

struct FactorPaths {
    PathMatrix n1;
    PathMatrix n2;  // empty for one-factor models
};
FactorPaths factor_paths(std::uint64_t seed, const PathGrid& grid, const SpotModel& m,
                         Scheme scheme, std::size_t n_paths, unsigned threads = 0);

// Characteristic function of log S(t).
std::complex<double> log_spot_chf(double u, double t, const SpotModel& m);
// Complex-argument version (Gauss-Legendre for the OU part).
std::complex<double> log_spot_chf(std::complex<double> u, double t, const SpotModel& m);

}  // namespace ounts
