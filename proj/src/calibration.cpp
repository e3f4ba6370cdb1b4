#include "ounts/calibration.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "ounts/dates.hpp"
#include "ounts/errors.hpp"
#include "ounts/market.hpp"
#include "ounts/optimize.hpp"
#include "ounts/samplers.hpp"
#include "ounts/special_functions.hpp"
#include "ounts/stats.hpp"

namespace ounts {

namespace {

constexpr double kDay = 1.0 / kDaysPerYear;

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double mean_of(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

template <class F>
auto run_stage(const char* name, F&& body) -> decltype(body()) {
    const auto tag = [name](const char* what) { return std::string("calibration stage '") + name + "': " + what; };
    try {
        return body();
    } catch (const ConfigError& e) {
        throw ConfigError(tag(e.what()));
    } catch (const DomainError& e) {
        throw DomainError(tag(e.what()));
    } catch (const NumericalError& e) {
        throw NumericalError(tag(e.what()));
    }
}

}  // namespace

void MarketSeries::validate() const {
    if (days.size() != prices.size() || days.size() != trading_day.size()) {
        throw ConfigError("market series: column lengths differ");
    }
    for (std::size_t i = 0; i < days.size(); ++i) {
        if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
            throw ConfigError("market series: price on " + format_iso_date(days[i]) + " must be positive");
        }
        if (i > 0 && days[i] <= days[i - 1]) {
            throw ConfigError("market series: date " + format_iso_date(days[i]) +
                              (days[i] == days[i - 1] ? " is duplicated" : " is out of order"));
        }
    }
}

MarketSeries load_market_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open market file '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
    const auto header = split_csv(line);
    if (header.size() < 2 || header[0] != "date" || header[1] != "price" ||
        (header.size() == 3 && header[2] != "trading_day") || header.size() > 3) {
        throw ConfigError(path + ":1: expected header 'date,price[,trading_day]'");
    }
    const bool has_flag = header.size() == 3;
    MarketSeries s;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto cells = split_csv(line);
        const auto where = [&] { return path + ":" + std::to_string(line_no) + ": "; };
        if (cells.size() != header.size()) throw ConfigError(where() + "expected " + std::to_string(header.size()) + " fields");
        int day = 0;
        try {
            day = parse_iso_date(cells[0]);
        } catch (const ConfigError& e) {
            throw ConfigError(where() + e.what());
        }
        double price = 0.0;
        try {
            std::size_t used = 0;
            price = std::stod(cells[1], &used);
            if (used != cells[1].size()) throw std::invalid_argument("trailing characters");
        } catch (const std::exception&) {
            throw ConfigError(where() + "price '" + cells[1] + "' is not a number");
        }
        if (!(price > 0.0) || !std::isfinite(price)) {
            throw ConfigError(where() + "price on " + cells[0] + " must be positive");
        }
        if (!s.days.empty()) {
            if (day == s.days.back()) throw ConfigError(where() + "duplicated date " + cells[0]);
            if (day < s.days.back()) throw ConfigError(where() + "date " + cells[0] + " is out of order");
        }
        bool trading = true;
        if (has_flag) {
            const std::string& f = cells[2];
            if (f == "1" || f == "true") trading = true;
            else if (f == "0" || f == "false") trading = false;
            else throw ConfigError(where() + "trading_day must be 0/1/true/false");
        }
        s.days.push_back(day);
        s.prices.push_back(price);
        s.trading_day.push_back(trading);
    }
    if (s.days.empty()) throw ConfigError(path + ": no data rows");
    return s;
}

void write_market_csv(const std::string& path, const MarketSeries& s) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(17);
    out << "date,price,trading_day\n";
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << format_iso_date(s.days[i]) << ',' << s.prices[i] << ',' << (s.trading_day[i] ? 1 : 0) << '\n';
    }
}

// ---------------------------------------------------------------- seasonality

double SeasonalityFit::log_level(int day) const {
    const double t = (day - origin_day) * kDay;
    const double w = 2.0 * std::numbers::pi * t;
    return intercept + slope * t + amp1 * std::cos(w + phase1) + amp2 * std::cos(2.0 * w + phase2);
}

SeasonalityResult fit_seasonality(const MarketSeries& series) {
    series.validate();
    if (series.size() < 2 || series.days.back() - series.days.front() + 1 < 730) {
        throw ConfigError("seasonality fit needs at least two years of daily data");
    }
    const auto n = static_cast<Eigen::Index>(series.size());
    Eigen::MatrixXd x(n, 6);
    Eigen::VectorXd y(n);
    const int origin = series.days.front();
    for (Eigen::Index i = 0; i < n; ++i) {
        const double t = (series.days[i] - origin) * kDay;
        const double w = 2.0 * std::numbers::pi * t;
        x.row(i) << 1.0, t, std::cos(w), std::sin(w), std::cos(2.0 * w), std::sin(2.0 * w);
        y(i) = std::log(series.prices[i]);
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < 6) throw NumericalError("seasonality design matrix is rank deficient");
    const Eigen::VectorXd beta = qr.solve(y);
    SeasonalityResult r;
    r.fit.origin_day = origin;
    r.fit.intercept = beta(0);
    r.fit.slope = beta(1);
    // a cos w + b sin w = A cos(w + phi) with A cos phi = a, A sin phi = -b
    r.fit.amp1 = std::hypot(beta(2), beta(3));
    r.fit.phase1 = r.fit.amp1 > 0.0 ? std::atan2(-beta(3), beta(2)) : 0.0;
    r.fit.amp2 = std::hypot(beta(4), beta(5));
    r.fit.phase2 = r.fit.amp2 > 0.0 ? std::atan2(-beta(5), beta(4)) : 0.0;
    const Eigen::VectorXd resid = y - x * beta;
    r.residuals.assign(resid.data(), resid.data() + n);
    return r;
}

// ---------------------------------------------------------------- month-ahead factor

MarketSeries fill_non_trading_days(RngStream& rng, const MarketSeries& series, const NtsParams& levy) {
    series.validate();
    levy.validate();
    MarketSeries out = series;
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (out.trading_day[i]) continue;
        const double dt = (out.days[i] - out.days[i - 1]) * kDay;
        const double l = sample_ts(rng, levy.subordinator(dt));
        const double step = levy.theta * l + levy.sigma * std::sqrt(l) * sample_normal(rng);
        out.prices[i] = out.prices[i - 1] * std::exp(step);
    }
    return out;
}

double nig_logpdf(double x, double sigma, double theta, double beta, double mass) {
    if (!(sigma > 0.0) || !(beta > 0.0) || !(mass > 0.0)) {
        throw DomainError("nig_logpdf needs sigma, beta, mass > 0");
    }
    const double s2 = sigma * sigma;
    const double p = x * x / (2.0 * s2) + std::numbers::pi * mass * mass;
    const double q = beta + theta * theta / (2.0 * s2);
    return std::log(2.0 * mass) + 2.0 * mass * std::sqrt(std::numbers::pi * beta) + theta * x / s2 -
           std::log(sigma * std::sqrt(2.0 * std::numbers::pi)) + 0.5 * std::log(q / p) +
           log_bessel_k(1.0, 2.0 * std::sqrt(p * q));
}

namespace {

struct Increments {
    std::vector<double> x;
    std::vector<double> dt;
};

Increments trading_increments(const MarketSeries& s) {
    Increments inc;
    std::size_t prev = s.size();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (!s.trading_day[i]) continue;
        if (prev != s.size()) {
            inc.x.push_back(std::log(s.prices[i] / s.prices[prev]));
            inc.dt.push_back((s.days[i] - s.days[prev]) * kDay);
        }
        prev = i;
    }
    return inc;
}

// Moments of one-day increments, falling back to all increments scaled to one day.
CumulantEstimate daily_cumulants(const Increments& inc) {
    std::vector<double> daily;
    for (std::size_t i = 0; i < inc.x.size(); ++i) {
        if (std::fabs(inc.dt[i] - kDay) < 1e-12) daily.push_back(inc.x[i]);
    }
    if (daily.size() < 20) {
        daily.clear();
        for (std::size_t i = 0; i < inc.x.size(); ++i) daily.push_back(inc.x[i] * std::sqrt(kDay / inc.dt[i]));
    }
    return estimate_cumulants(daily);
}

NtsParams levy_moments(const CumulantEstimate& c, double alpha) {
    if (!(c.c2 > 0.0)) throw NumericalError("month-ahead increments have zero variance");
    if (!(c.c4 > 0.0)) throw NumericalError("month-ahead increments have non-positive fourth cumulant");
    const double theta = c.mean / kDay;
    auto law = [&](double nu) {
        const double s2 = c.c2 / kDay - theta * theta * nu;
        return make_nts(alpha, std::sqrt(std::max(s2, 0.0)), nu, theta);
    };
    auto excess = [&](double nu) { return nts_cumulant(4, kDay, law(nu)) - c.c4; };
    const double lo = 1e-12;
    double hi;
    if (theta != 0.0) {
        hi = c.c2 / (kDay * theta * theta) * (1.0 - 1e-12);
    } else {
        hi = 1.0;
        while (excess(hi) < 0.0 && hi < 1e12) hi *= 2.0;
    }
    if (excess(hi) < 0.0) throw NumericalError("sample kurtosis is beyond the range of the tempered stable family");
    return law(find_root(excess, lo, hi));
}

}  // namespace

LevyFit fit_levy_factor(const MarketSeries& series, double alpha) {
    series.validate();
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    const Increments inc = trading_increments(series);
    if (inc.x.size() < 30) throw ConfigError("Levy factor fit needs at least 30 trading-day increments");
    const CumulantEstimate c = daily_cumulants(inc);
    LevyFit fit;
    fit.n_increments = inc.x.size();
    if (alpha != 0.5) {
        fit.params = levy_moments(c, alpha);
        fit.method = "moments";
        return fit;
    }
    if (!(c.c2 > 0.0)) throw NumericalError("month-ahead increments have zero variance");
    const double theta0 = c.mean / kDay;
    const double sigma0 = std::sqrt(c.c2 / kDay);
    const double nu0 = std::clamp(std::max(c.c4, 0.0) / (c.c2 * c.c2) * kDay / 3.0, 1e-3, 1e3);

    auto nll = [&](const std::vector<double>& v) {
        const double sigma = std::exp(v[0]);
        const double nu = std::exp(v[1]);
        const NtsParams p = make_nts(0.5, sigma, nu, v[2]);
        const double beta = p.beta();
        double ll = 0.0;
        for (std::size_t i = 0; i < inc.x.size(); ++i) {
            ll += nig_logpdf(inc.x[i], sigma, v[2], beta, p.c() * inc.dt[i]);
        }
        return -ll;
    };
    NelderMeadOptions opt;
    opt.initial_step = 0.2;
    const OptimizeResult r = nelder_mead(nll, {std::log(sigma0), std::log(nu0), theta0}, opt);
    if (!r.converged) {
        std::ostringstream msg;
        msg << "NIG likelihood maximisation did not converge after " << r.evaluations
            << " evaluations; final gradient norm " << r.gradient_norm;
        throw NumericalError(msg.str());
    }
    fit.params = make_nts(0.5, std::exp(r.x[0]), std::exp(r.x[1]), r.x[2]);
    fit.log_likelihood = -r.value;
    fit.method = "mle";
    fit.converged = r.converged;
    fit.gradient_norm = r.gradient_norm;
    return fit;
}

// ---------------------------------------------------------------- OU factor

std::vector<double> build_ou_residuals(std::span<const double> spot_log, std::span<const double> ma_log,
                                       double b) {
    if (spot_log.size() != ma_log.size()) throw ConfigError("OU residuals: spot and month-ahead series are misaligned");
    if (!(b > 0.0)) throw DomainError("OU residuals: b must be positive");
    const double a = std::exp(-b * kDay);
    std::vector<double> eps;
    if (spot_log.size() < 2) return eps;
    eps.reserve(spot_log.size() - 1);
    for (std::size_t k = 0; k + 1 < spot_log.size(); ++k) {
        eps.push_back((spot_log[k + 1] - ma_log[k + 1]) - (spot_log[k] - ma_log[k]) * a);
    }
    return eps;
}

namespace {

double approx1_loglik(std::span<const double> eps, double b, double sigma, double nu, double alpha) {
    const OuNtsParams p = make_ou_nts(alpha, b, sigma, nu, 0.0);
    const StepDecomposition dec = step_decomposition(kDay, p);
    double ll = 0.0;
    for (double e : eps) ll += nig_logpdf(e, sigma, 0.0, dec.m1_law.beta, dec.m1_law.c_mass);
    return ll;
}

}  // namespace

OuFit fit_ou_factor(std::span<const double> spot_log, std::span<const double> ma_log, double alpha) {
    if (alpha != 0.5) throw DomainError("OU factor likelihood is available for alpha = 1/2 only");
    if (spot_log.size() != ma_log.size()) throw ConfigError("OU fit: spot and month-ahead series are misaligned");
    const std::size_t n = spot_log.size();
    if (n < 30) throw ConfigError("OU fit needs at least 30 observations");
    std::vector<double> x(n);
    for (std::size_t k = 0; k < n; ++k) x[k] = spot_log[k] - ma_log[k];

    // AR(1) with intercept
    const std::span<const double> lead(x.data() + 1, n - 1);
    const std::span<const double> lag(x.data(), n - 1);
    const double ml = mean_of(lag);
    const double md = mean_of(lead);
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        sxx += (lag[k] - ml) * (lag[k] - ml);
        sxy += (lag[k] - ml) * (lead[k] - md);
    }
    if (!(sxx > 1e-300)) throw NumericalError("OU fit: degenerate variance (spread series is constant)");
    const double phi = sxy / sxx;
    double sse = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double r = lead[k] - md - phi * (lag[k] - ml);
        sse += r * r;
    }
    if (!(sse > 1e-20 * sxx)) throw NumericalError("OU fit: degenerate variance (deterministic spread, sigma = 0)");
    if (!(phi > 0.0 && phi < 1.0)) {
        std::ostringstream msg;
        msg << "OU fit: AR(1) coefficient " << phi << " implies b <= 0 or no mean reversion";
        throw NumericalError(msg.str());
    }
    OuFit fit;
    fit.b_regression = -std::log(phi) / kDay;

    // Stage 2: (sigma, nu) given b from moment starting values.
    const double b0 = fit.b_regression;
    const std::vector<double> eps0 = build_ou_residuals(spot_log, ma_log, b0);
    const CumulantEstimate c = estimate_cumulants(eps0);
    const double sigma0 = std::sqrt(c.c2 * 2.0 * b0 / -std::expm1(-2.0 * b0 * kDay));
    const double nu0 = std::clamp(
        std::max(c.c4, 0.0) * 4.0 * b0 / (-std::expm1(-4.0 * b0 * kDay) * 3.0 * std::pow(sigma0, 4)), 1e-3, 1e3);
    NelderMeadOptions opt;
    opt.initial_step = 0.2;
    auto nll2 = [&](const std::vector<double>& v) {
        return -approx1_loglik(eps0, b0, std::exp(v[0]), std::exp(v[1]), alpha);
    };
    const OptimizeResult r2 = nelder_mead(nll2, {std::log(sigma0), std::log(nu0)}, opt);

    // Stage 3: joint refinement.
    auto nll3 = [&](const std::vector<double>& v) {
        const double b = std::exp(v[0]);
        const std::vector<double> eps = build_ou_residuals(spot_log, ma_log, b);
        return -approx1_loglik(eps, b, std::exp(v[1]), std::exp(v[2]), alpha);
    };
    const OptimizeResult r3 = nelder_mead(nll3, {std::log(b0), r2.x[0], r2.x[1]}, opt);
    if (!r3.converged) {
        std::ostringstream msg;
        msg << "OU likelihood maximisation did not converge after " << r3.evaluations
            << " evaluations; final gradient norm " << r3.gradient_norm;
        throw NumericalError(msg.str());
    }
    const double b = std::exp(r3.x[0]);
    if (!(b > 0.0) || !std::isfinite(b)) throw NumericalError("OU fit: estimated b is not positive");
    fit.params = make_ou_nts(alpha, b, std::exp(r3.x[1]), std::exp(r3.x[2]), 0.0);
    fit.log_likelihood = -r3.value;
    fit.converged = r3.converged;
    fit.gradient_norm = r3.gradient_norm;
    if (!fit.params.risk_neutral_feasible()) {
        std::ostringstream msg;
        msg << "fitted OU factor has sqrt(2 beta)/sigma = " << fit.params.cgf_bound()
            << " <= 1; the risk-neutral drift is unavailable";
        fit.warnings.push_back(msg.str());
    }
    return fit;
}

// ---------------------------------------------------------------- pipeline

CalibrationResult calibrate(const MarketSeries& day_ahead, const MarketSeries& month_ahead, double alpha,
                            std::uint64_t seed) {
    run_stage("inputs", [&] {
        day_ahead.validate();
        month_ahead.validate();
        if (day_ahead.days != month_ahead.days) {
            throw ConfigError("day-ahead and month-ahead series must cover the same dates");
        }
        return 0;
    });
    CalibrationResult out;
    const LevyFit levy = run_stage("levy", [&] { return fit_levy_factor(month_ahead, alpha); });
    out.levy = levy.params;
    out.levy_log_likelihood = levy.log_likelihood;
    out.levy_method = levy.method;
    const MarketSeries filled = run_stage("fill", [&] {
        RngStream rng(seed, 0, 2);
        return fill_non_trading_days(rng, month_ahead, levy.params);
    });
    const SeasonalityResult sd = run_stage("seasonality", [&] { return fit_seasonality(day_ahead); });
    const SeasonalityResult sm = run_stage("seasonality", [&] { return fit_seasonality(filled); });
    out.seasonality = sd.fit;
    out.seasonality_ma = sm.fit;
    out.last_price = day_ahead.prices.back();
    const OuFit ou = run_stage("ou", [&] { return fit_ou_factor(sd.residuals, sm.residuals, alpha); });
    out.ou = ou.params;
    out.ou_log_likelihood = ou.log_likelihood;
    out.b_regression = ou.b_regression;
    out.warnings = ou.warnings;
    const std::vector<double> eps = build_ou_residuals(sd.residuals, sm.residuals, ou.params.b);
    out.n_residuals = eps.size();
    out.residual_lag1_acf = lag1_autocorrelation(eps);
    out.residual_skewness = sample_skewness(eps);
    out.residual_skewness_se = sample_skewness_se(eps);
    if (std::fabs(out.residual_skewness) > 3.0 * out.residual_skewness_se) {
        out.warnings.push_back("OU residuals are skewed; the symmetric model may be inadequate");
    }
    return out;
}

SyntheticMarket synthesize_market(std::uint64_t seed, const SyntheticMarketSpec& spec) {
    if (spec.days < 2) throw ConfigError("synthetic market needs at least 2 days");
    if (!(spec.base > 0.0)) throw ConfigError("synthetic base price must be positive");
    const SpotModel m = SpotModel::two_factor(ForwardCurve::flat(1.0), spec.ou, spec.levy);
    m.validate();
    const PathGrid grid = PathGrid::uniform(kDay, static_cast<std::size_t>(spec.days - 1));
    const SpotPathGenerator gen(grid, m, Scheme::exact);
    std::vector<double> n1(grid.size()), n2(grid.size());
    gen.factors(seed, 0, n1, n2);
    SeasonalityFit season;
    season.origin_day = spec.start_day;
    season.intercept = std::log(spec.base);
    season.slope = 0.05;
    season.amp1 = 0.25;
    season.phase1 = 0.0;
    season.amp2 = 0.08;
    season.phase2 = 1.0;

    SyntheticMarket out;
    for (int k = 0; k < spec.days; ++k) {
        const int day = spec.start_day + k;
        const double t = grid.times[static_cast<std::size_t>(k)];
        const double h1 = rn_drift_one_factor(t, m.ou);
        const double h2 = rn_drift_levy(t, *m.levy);
        out.day_ahead.days.push_back(day);
        out.day_ahead.prices.push_back(std::exp(season.log_level(day) + h1 + n1[k] + h2 + n2[k]));
        out.day_ahead.trading_day.push_back(true);
        const bool trading = weekday(day) < 5;
        out.month_ahead.days.push_back(day);
        out.month_ahead.trading_day.push_back(trading);
        if (trading || k == 0) {
            out.month_ahead.prices.push_back(spec.base * std::exp(h2 + n2[k]));
        } else {
            out.month_ahead.prices.push_back(out.month_ahead.prices.back());
        }
    }
    return out;
}

RoundTripReport check_round_trip(const SyntheticMarketSpec& truth, const CalibrationResult& fit) {
    const auto rel = [](double est, double ref) { return std::fabs(est - ref) / std::fabs(ref); };
    RoundTripReport r;
    r.b_rel = rel(fit.ou.b, truth.ou.b);
    r.sigma1_rel = rel(fit.ou.nts.sigma, truth.ou.nts.sigma);
    r.nu1_rel = rel(fit.ou.nts.nu, truth.ou.nts.nu);
    r.sigma2_rel = rel(fit.levy.sigma, truth.levy.sigma);
    r.nu2_rel = rel(fit.levy.nu, truth.levy.nu);
    r.theta2_abs = std::fabs(fit.levy.theta - truth.levy.theta);
    r.b_ok = r.b_rel <= 0.10;
    r.sigma1_ok = r.sigma1_rel <= 0.05;
    r.nu1_ok = r.nu1_rel <= 0.15;
    r.sigma2_ok = r.sigma2_rel <= 0.05;
    r.nu2_ok = r.nu2_rel <= 0.15;
    r.theta2_ok = r.theta2_abs <= 0.02;
    return r;
}

}  // namespace ounts
