#include <doctest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "ounts/calibration.hpp"
#include "ounts/dates.hpp"
#include "ounts/errors.hpp"
#include "ounts/quadrature.hpp"
#include "ounts/samplers.hpp"
#include "ounts/simulation.hpp"
#include "ounts/stats.hpp"
#include "test_support.hpp"

using namespace ounts;

namespace {

constexpr double kDay = 1.0 / 365.0;
constexpr int kStart = 16801;  // 2016-01-01

// Daily series whose log increments are theta L + sigma sqrt(L) X, L ~ TS(alpha, beta, c/365).
MarketSeries levy_series(std::uint64_t seed, const NtsParams& p, int days, double level = 20.0) {
    RngStream rng(seed, 0);
    MarketSeries s;
    double x = std::log(level);
    const TsLaw law = p.subordinator(kDay);
    for (int k = 0; k < days; ++k) {
        if (k > 0) {
            const double l = sample_ts(rng, law);
            x += p.theta * l + p.sigma * std::sqrt(l) * sample_normal(rng);
        }
        s.days.push_back(kStart + k);
        s.prices.push_back(std::exp(x));
        s.trading_day.push_back(true);
    }
    return s;
}

std::vector<double> ou_path(std::uint64_t seed, const OuNtsParams& p, int days) {
    RngStream rng(seed, 0);
    return simulate_path(rng, PathGrid::uniform(kDay, static_cast<std::size_t>(days - 1)), p, Scheme::exact);
}

MarketSeries from_log_levels(const std::vector<double>& logs) {
    MarketSeries s;
    for (std::size_t k = 0; k < logs.size(); ++k) {
        s.days.push_back(kStart + static_cast<int>(k));
        s.prices.push_back(std::exp(logs[k]));
        s.trading_day.push_back(true);
    }
    return s;
}

std::string error_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const std::exception& e) {
        return e.what();
    }
    return {};
}

}  // namespace

TEST_SUITE("calibration") {

TEST_CASE("market CSV loading") {
    testing::TempDir dir("market");
    const MarketSeries ok =
        load_market_csv(dir.write("ok.csv", "date,price\n2020-01-01,10.5\n2020-01-02,11\n2020-01-03,10.75\n"));
    CHECK(ok.size() == 3);
    CHECK(ok.prices[1] == 11.0);
    CHECK(ok.trading_day == std::vector<bool>{true, true, true});

    const std::string dup = error_of(
        [&] { load_market_csv(dir.write("dup.csv", "date,price\n2020-01-01,10\n2020-01-01,11\n")); });
    CHECK(dup.find("duplicated date 2020-01-01") != std::string::npos);
    CHECK(dup.find("dup.csv:3") != std::string::npos);

    const std::string zero =
        error_of([&] { load_market_csv(dir.write("zero.csv", "date,price\n2020-01-01,10\n2020-01-02,0\n")); });
    CHECK(zero.find("must be positive") != std::string::npos);
    CHECK(zero.find(":3") != std::string::npos);

    CHECK_THROWS_AS(load_market_csv(dir.write("order.csv", "date,price\n2020-01-02,10\n2020-01-01,11\n")),
                    ConfigError);
    CHECK_THROWS_AS(load_market_csv(dir.write("text.csv", "date,price\n2020-01-02,abc\n")), ConfigError);
    CHECK_THROWS_AS(load_market_csv(dir.write("hdr.csv", "day,value\n2020-01-02,1\n")), ConfigError);
    CHECK_THROWS_AS(load_market_csv(dir.file("absent.csv")), ConfigError);

    MarketSeries s = levy_series(1, make_nts(0.5, 0.25, 0.4, -0.03), 20);
    s.trading_day[4] = false;
    write_market_csv(dir.file("round.csv"), s);
    const MarketSeries back = load_market_csv(dir.file("round.csv"));
    CHECK(back.days == s.days);
    CHECK(back.prices == s.prices);
    CHECK(back.trading_day == s.trading_day);
}

TEST_CASE("flagged trading days parse") {
    testing::TempDir dir("flags");
    const MarketSeries s = load_market_csv(
        dir.write("f.csv", "date,price,trading_day\n2020-01-03,10,1\n2020-01-04,10,0\n2020-01-05,10,false\n"
                           "2020-01-06,10.2,true\n"));
    CHECK(s.trading_day == std::vector<bool>{true, false, false, true});
}

TEST_CASE("seasonality on noiseless signals") {
    std::vector<double> logs;
    for (int k = 0; k < 1461; ++k) {
        const double t = k * kDay;
        logs.push_back(0.1 + 0.02 * t + 0.3 * std::cos(2.0 * std::numbers::pi * t));
    }
    const SeasonalityResult r = fit_seasonality(from_log_levels(logs));
    CHECK(std::abs(r.fit.intercept - 0.1) < 1e-8);
    CHECK(std::abs(r.fit.slope - 0.02) < 1e-8);
    CHECK(std::abs(r.fit.amp1 - 0.3) < 1e-8);
    CHECK(std::abs(r.fit.phase1) < 1e-8);
    CHECK(std::abs(r.fit.amp2) < 1e-8);
    for (double e : r.residuals) CHECK(std::abs(e) < 1e-10);
    CHECK(std::abs(r.fit.log_level(kStart + 100) - logs[100]) < 1e-10);

    const SeasonalityResult flat = fit_seasonality(from_log_levels(std::vector<double>(800, std::log(7.0))));
    CHECK(std::abs(flat.fit.intercept - std::log(7.0)) < 1e-12);
    CHECK(std::abs(flat.fit.slope) < 1e-12);
    CHECK(std::abs(flat.fit.amp1) < 1e-12);
    CHECK(std::abs(flat.fit.amp2) < 1e-12);

    CHECK_THROWS_AS(fit_seasonality(from_log_levels(std::vector<double>(400, 1.0))), ConfigError);
}

TEST_CASE("seasonality under OU noise") {
    const std::vector<double> noise = ou_path(3, testing::nominal_ou(), 1461);
    std::vector<double> logs;
    for (int k = 0; k < 1461; ++k) {
        const double t = k * kDay;
        logs.push_back(std::log(20.0) + 0.3 * std::cos(2.0 * std::numbers::pi * t + 0.4) +
                       0.1 * std::cos(4.0 * std::numbers::pi * t) + noise[static_cast<std::size_t>(k)]);
    }
    const SeasonalityResult r = fit_seasonality(from_log_levels(logs));
    CHECK(std::abs(r.fit.amp1 - 0.3) / 0.3 <= 0.10);
    CHECK(std::abs(mean_with_se(r.residuals).mean) <= 1e-8);
}

TEST_CASE("filling non-trading days") {
    const NtsParams levy = make_nts(0.5, 0.25, 0.4, -0.03);
    MarketSeries s = levy_series(2, levy, 10);
    RngStream rng(1, 0);
    const MarketSeries same = fill_non_trading_days(rng, s, levy);
    CHECK(same.prices == s.prices);

    s.trading_day[5] = false;
    const MarketSeries filled = fill_non_trading_days(rng, s, levy);
    CHECK(filled.prices[5] > 0.0);
    CHECK(std::isfinite(std::log(filled.prices[5] / filled.prices[4])));
    CHECK(filled.prices[4] == s.prices[4]);
    CHECK(filled.prices[6] == s.prices[6]);
    CHECK(filled.trading_day == s.trading_day);

    // imputed one-day log increments have variance (sigma^2 + theta^2 nu) dt
    const std::size_t n = 200000;
    std::vector<double> inc(n);
    MarketSeries two{{kStart, kStart + 1}, {10.0, 10.0}, {true, false}};
    for (std::size_t i = 0; i < n; ++i) {
        RngStream r(5, i);
        inc[i] = std::log(fill_non_trading_days(r, two, levy).prices[1] / 10.0);
    }
    const CumulantEstimate c = estimate_cumulants(inc);
    const double theory = (levy.sigma * levy.sigma + levy.theta * levy.theta * levy.nu) * kDay;
    CHECK(std::abs(c.c2 - theory) < 3.0 * c.c2_se);
}

TEST_CASE("NIG density") {
    const NtsParams p = make_nts(0.5, 0.25, 0.4, -0.03);
    const double mass = p.c() * 5.0 * kDay;
    const auto f = [&](double x) { return std::exp(nig_logpdf(x, p.sigma, p.theta, p.beta(), mass)); };
    const auto xf = [&](double x) { return x * f(x); };
    // tails decay like exp(-sqrt(2 beta)/sigma |x|), about exp(-6.3 |x|) here
    const double total = integrate_adaptive(f, -8.0, 8.0, 1e-13, 1e-12).value;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    const double mean = integrate_adaptive(xf, -8.0, 8.0, 1e-14, 1e-12).value;
    CHECK(mean == doctest::Approx(p.theta * 5.0 * kDay).epsilon(1e-8));
    CHECK_THROWS_AS(nig_logpdf(0.0, 0.0, 0.0, 1.0, 1.0), DomainError);
}

TEST_CASE("NIG maximum likelihood is consistent") {
    const NtsParams truth = make_nts(0.5, 0.25, 0.4, -0.03);
    // 64 years of daily increments: sampling SDs are about 4% (sigma), 8% (nu) and 0.03 (theta)
    const LevyFit big = fit_levy_factor(levy_series(11, truth, 1461 * 16), 0.5);
    CHECK(big.method == "mle");
    CHECK(big.converged);
    CHECK(std::abs(big.params.sigma / truth.sigma - 1.0) < 0.15);
    CHECK(std::abs(big.params.nu / truth.nu - 1.0) < 0.30);
    CHECK(std::abs(big.params.theta - truth.theta) < 0.10);
    CHECK(big.n_increments == 1461 * 16 - 1);

    // symmetric data on four years: |theta| within two asymptotic standard errors
    const NtsParams sym = make_nts(0.5, 0.25, 0.4, 0.0);
    const LevyFit small = fit_levy_factor(levy_series(12, sym, 1461), 0.5);
    const double se_theta = sym.sigma / std::sqrt(1460.0 * kDay);
    CHECK(std::abs(small.params.theta) <= 2.0 * se_theta);
    CHECK(std::isfinite(small.log_likelihood));
}

TEST_CASE("method of moments matches variance and fourth cumulant") {
    for (double alpha : {0.3, 0.7}) {
        const NtsParams truth = make_nts(alpha, 0.25, 0.4, -0.03);
        const MarketSeries s = levy_series(13, truth, 3000);
        const LevyFit fit = fit_levy_factor(s, alpha);
        CHECK(fit.method == "moments");
        std::vector<double> inc;
        for (std::size_t k = 1; k < s.size(); ++k) inc.push_back(std::log(s.prices[k] / s.prices[k - 1]));
        const CumulantEstimate c = estimate_cumulants(inc);
        CHECK(testing::rel_diff(nts_cumulant(2, kDay, fit.params), c.c2) < 1e-8);
        CHECK(testing::rel_diff(nts_cumulant(4, kDay, fit.params), c.c4) < 1e-8);
        CHECK(testing::rel_diff(nts_cumulant(1, kDay, fit.params), c.mean) < 1e-8);
    }
}

TEST_CASE("skewness standard error reduces to sqrt(6/n) for Gaussian data") {
    RngStream rng(41, 0);
    std::vector<double> x(200000);
    for (auto& v : x) v = sample_normal(rng);
    CHECK(sample_skewness_se(x) == doctest::Approx(std::sqrt(6.0 / x.size())).epsilon(0.03));
}

TEST_CASE("OU residuals") {
    const std::vector<double> flat(50, 2.0);
    for (double e : build_ou_residuals(flat, flat, 5.0)) CHECK(e == 0.0);
    const std::vector<double> s{1.0, 2.0, 4.0}, f{0.5, 0.5, 1.0};
    const std::vector<double> e = build_ou_residuals(s, f, 3.0);
    const double a = std::exp(-3.0 * kDay);
    CHECK(e.size() == 2);
    CHECK(e[0] == doctest::Approx(1.5 - 0.5 * a));
    CHECK(e[1] == doctest::Approx(3.0 - 1.5 * a));
    CHECK_THROWS_AS(build_ou_residuals(s, std::vector<double>{1.0}, 3.0), ConfigError);

    // at the true b the residuals are the exact transition noise
    const OuNtsParams p = testing::nominal_ou();
    const std::vector<double> n1 = ou_path(21, p, 1461);
    const MarketSeries ma = levy_series(22, make_nts(0.5, 0.25, 0.4, -0.03), 1461);
    std::vector<double> spot(n1.size()), fwd(n1.size());
    for (std::size_t k = 0; k < n1.size(); ++k) {
        fwd[k] = std::log(ma.prices[k]);
        spot[k] = fwd[k] + n1[k];
    }
    const std::vector<double> eps = build_ou_residuals(spot, fwd, p.b);
    const double n = static_cast<double>(eps.size());
    CHECK(std::abs(lag1_autocorrelation(eps)) <= 2.0 / std::sqrt(n));
    CHECK(std::abs(sample_skewness(eps)) <= 3.0 * sample_skewness_se(eps));
}

TEST_CASE("OU fit rejects deterministic spreads") {
    std::vector<double> s(200), f(200, 0.0);
    for (std::size_t k = 0; k < s.size(); ++k) s[k] = 0.3 * std::exp(-5.0 * k * kDay);
    const std::string msg = error_of([&] { fit_ou_factor(s, f); });
    CHECK(msg.find("degenerate variance") != std::string::npos);
    CHECK_THROWS_AS(fit_ou_factor(s, f), NumericalError);
    CHECK_THROWS_AS(fit_ou_factor(std::vector<double>(200, 1.0), f), NumericalError);
    CHECK_THROWS_AS(fit_ou_factor(s, f, 0.3), DomainError);
}

TEST_CASE("OU likelihood fit is consistent on a long sample") {
    const OuNtsParams p = testing::nominal_ou();
    const int days = 365 * 60;
    const std::vector<double> n1 = ou_path(31, p, days);
    const std::vector<double> zero(n1.size(), 0.0);
    const OuFit fit = fit_ou_factor(n1, zero);
    CHECK(fit.converged);
    CHECK(std::abs(fit.params.b / p.b - 1.0) < 0.10);
    CHECK(std::abs(fit.params.nts.sigma / p.nts.sigma - 1.0) < 0.15);
    CHECK(std::abs(fit.params.nts.nu / p.nts.nu - 1.0) < 0.40);
    CHECK(fit.params.risk_neutral_feasible());
    CHECK(fit.warnings.empty());
}

TEST_CASE("OU fit warns when the risk-neutral drift is unavailable") {
    const OuNtsParams p = make_ou_nts(0.5, 5.0, 1.2, 2.5);  // sqrt(2 beta)/sigma = 0.53
    const std::vector<double> n1 = ou_path(32, p, 365 * 20);
    const OuFit fit = fit_ou_factor(n1, std::vector<double>(n1.size(), 0.0));
    CHECK_FALSE(fit.params.risk_neutral_feasible());
    REQUIRE(fit.warnings.size() == 1);
    CHECK(fit.warnings[0].find("risk-neutral drift") != std::string::npos);
}

TEST_CASE("synthetic market and pipeline") {
    const SyntheticMarket a = synthesize_market(5);
    const SyntheticMarket b = synthesize_market(5);
    CHECK(a.day_ahead.prices == b.day_ahead.prices);
    CHECK(a.month_ahead.prices == b.month_ahead.prices);
    CHECK(a.day_ahead.size() == 1461);
    CHECK(a.month_ahead.days == a.day_ahead.days);
    std::size_t weekend = 0;
    for (std::size_t k = 0; k < a.month_ahead.size(); ++k) {
        const bool trading = weekday(a.month_ahead.days[k]) < 5;
        CHECK(a.month_ahead.trading_day[k] == trading);
        weekend += !trading;
        if (!trading && k > 0) CHECK(a.month_ahead.prices[k] == a.month_ahead.prices[k - 1]);
    }
    CHECK(weekend > 400);

    const CalibrationResult r = calibrate(a.day_ahead, a.month_ahead, 0.5, 5);
    CHECK(r.levy_method == "mle");
    CHECK(r.n_residuals == 1460);
    CHECK(r.last_price == a.day_ahead.prices.back());
    CHECK(r.ou.b > 0.0);
    CHECK(std::isfinite(r.ou_log_likelihood));
    CHECK(std::isfinite(r.levy_log_likelihood));
    CHECK(std::abs(r.seasonality.amp1 - 0.25) < 0.1);
    // same seed, same result
    const CalibrationResult again = calibrate(a.day_ahead, a.month_ahead, 0.5, 5);
    CHECK(again.ou.nts.sigma == r.ou.nts.sigma);
    CHECK(again.levy.nu == r.levy.nu);

    MarketSeries shifted = a.month_ahead;
    shifted.days.back() += 1;
    const std::string msg = error_of([&] { calibrate(a.day_ahead, shifted, 0.5, 5); });
    CHECK(msg.find("calibration stage 'inputs'") != std::string::npos);
    CHECK_THROWS_AS(calibrate(a.day_ahead, shifted, 0.5, 5), ConfigError);
}

}  // TEST_SUITE
