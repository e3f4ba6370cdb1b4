#include "ounts/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "ounts/dates.hpp"
#include "ounts/errors.hpp"
#include "ounts/samplers.hpp"

namespace ounts {

ForwardCurve::ForwardCurve(std::vector<int> day_offsets, std::vector<double> values)
    : days_(std::move(day_offsets)), values_(std::move(values)) {
    if (days_.empty() || days_.size() != values_.size()) {
        throw ConfigError("forward curve needs matching, non-empty dates and values");
    }
    for (std::size_t i = 0; i < days_.size(); ++i) {
        if (i > 0 && days_[i] <= days_[i - 1]) throw ConfigError("forward curve dates must increase");
        if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
            throw ConfigError("forward curve values must be positive");
        }
    }
}

ForwardCurve ForwardCurve::flat(double value) { return ForwardCurve({0}, {value}); }

ForwardCurve ForwardCurve::load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open forward curve file '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (line.rfind("date,price", 0) != 0) {
        throw ConfigError(path + ":1: expected header 'date,price'");
    }
    std::vector<int> days;
    std::vector<double> values;
    int first = 0;
    for (int lineno = 2; std::getline(in, line); ++lineno) {
        if (line.empty() || line == "\r") continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected 'date,price'");
        }
        try {
            const int d = parse_iso_date(line.substr(0, comma));
            const double v = std::stod(line.substr(comma + 1));
            if (days.empty()) first = d;
            days.push_back(d - first);
            values.push_back(v);
        } catch (const std::exception& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return ForwardCurve(std::move(days), std::move(values));
}

double ForwardCurve::at(double t) const {
    if (values_.empty()) throw ConfigError("forward curve is empty");
    // A small guard keeps t = d/365 on day d despite rounding.
    const double day = std::floor(t * kDaysPerYear + 1e-9);
    const auto it = std::upper_bound(days_.begin(), days_.end(), day,
                                     [](double x, int d) { return x < static_cast<double>(d); });
    if (it == days_.begin()) return values_.front();
    return values_[static_cast<std::size_t>(it - days_.begin()) - 1];
}

SpotModel SpotModel::one_factor(ForwardCurve curve, OuNtsParams ou, double rate) {
    SpotModel m{std::move(curve), ou, std::nullopt, rate};
    m.validate();
    return m;
}

SpotModel SpotModel::two_factor(ForwardCurve curve, OuNtsParams ou, NtsParams levy, double rate) {
    SpotModel m{std::move(curve), ou, levy, rate};
    m.validate();
    return m;
}

void SpotModel::validate() const {
    if (curve.empty()) throw ConfigError("model has no forward curve");
    ou.validate();
    if (!ou.risk_neutral_feasible()) {
        std::ostringstream msg;
        msg << "risk-neutral drift unavailable: sqrt(2 beta)/sigma = " << ou.cgf_bound()
            << " must exceed 1 for the OU factor";
        throw DomainError(msg.str());
    }
    if (levy) {
        levy->validate();
        if (!nts_exp_moment_exists(1.0, *levy)) {
            throw DomainError("risk-neutral drift unavailable: nu (sigma^2/2 + theta) must be below 1 - alpha "
                              "for the Levy factor");
        }
    }
    if (!std::isfinite(rate)) throw ConfigError("rate must be finite");
}

double SpotModel::moment_bound() const {
    double bound = ou.cgf_bound();
    if (levy) {
        const double s2 = levy->sigma * levy->sigma;
        const double th = levy->theta;
        const double rhs = (1.0 - levy->alpha) / levy->nu;
        double root;
        if (s2 > 0.0) {
            root = (-th + std::sqrt(th * th + 2.0 * s2 * rhs)) / s2;
        } else {
            root = th > 0.0 ? rhs / th : std::numeric_limits<double>::infinity();
        }
        bound = std::min(bound, root);
    }
    return bound;
}

double rn_drift_one_factor(double t, const OuNtsParams& ou, LchRoute route) {
    if (t == 0.0) return -ou.n0;
    return -ou.n0 * std::exp(-ou.b * t) - transition_cgf(1.0, t, ou, route);
}

double rn_drift_one_factor(double t, const OuNtsParams& ou) {
    return rn_drift_one_factor(t, ou, ou.nts.alpha == 0.5 ? LchRoute::elementary : LchRoute::hypergeometric);
}

double rn_drift_levy(double t, const NtsParams& p) {
    if (p.sigma == 0.0 && p.theta == 0.0) return 0.0;
    return -t * nts_cumulant_exponent(1.0, p);
}

double rn_drift(double t, const SpotModel& m) {
    double h = rn_drift_one_factor(t, m.ou);
    if (m.levy) h += rn_drift_levy(t, *m.levy);
    return h;
}

namespace {

// Exact increments of theta L + sigma W(L) on a grid.
class LevyPathSimulator {
public:
    LevyPathSimulator(const PathGrid& grid, const NtsParams& p) : p_(p) {
        std::map<double, std::size_t> seen;
        for (std::size_t m = 1; m < grid.size(); ++m) {
            const double dt = grid.times[m] - grid.times[m - 1];
            auto it = seen.find(dt);
            if (it == seen.end()) {
                it = seen.emplace(dt, laws_.size()).first;
                laws_.push_back(p.subordinator(dt));
            }
            law_of_step_.push_back(it->second);
        }
    }

    void simulate(RngStream& rng, std::span<double> out) const {
        double x = 0.0;
        out[0] = 0.0;
        for (std::size_t m = 1; m < out.size(); ++m) {
            const double dl = sample_ts(rng, laws_[law_of_step_[m - 1]]);
            x += p_.theta * dl + p_.sigma * std::sqrt(dl) * sample_normal(rng);
            out[m] = x;
        }
    }

private:
    NtsParams p_;
    std::vector<TsLaw> laws_;
    std::vector<std::size_t> law_of_step_;
};

}  // namespace

struct SpotPathGenerator::Impl {
    PathGrid grid;
    OuPathSimulator ou_sim;
    std::optional<LevyPathSimulator> levy_sim;
    std::vector<double> level;   // F(0,t)
    std::vector<double> anchor;  // h(t)

    Impl(const PathGrid& g, const SpotModel& m, Scheme scheme) : grid(g), ou_sim(g, m.ou, scheme) {
        m.validate();
        if (m.levy) levy_sim.emplace(grid, *m.levy);
        level.resize(grid.size());
        anchor.resize(grid.size());
        for (std::size_t j = 0; j < grid.size(); ++j) {
            level[j] = m.curve.at(grid.times[j]);
            anchor[j] = rn_drift(grid.times[j], m);
        }
    }
};

SpotPathGenerator::SpotPathGenerator(const PathGrid& grid, const SpotModel& m, Scheme scheme)
    : impl_(std::make_unique<Impl>(grid, m, scheme)) {}
SpotPathGenerator::~SpotPathGenerator() = default;
SpotPathGenerator::SpotPathGenerator(SpotPathGenerator&&) noexcept = default;

const PathGrid& SpotPathGenerator::grid() const { return impl_->grid; }
bool SpotPathGenerator::two_factor() const { return impl_->levy_sim.has_value(); }

void SpotPathGenerator::factors(std::uint64_t seed, std::uint64_t path_id, std::span<double> n1,
                                std::span<double> n2) const {
    RngStream ou_rng(seed, path_id, 0);
    impl_->ou_sim.simulate(ou_rng, n1);
    if (impl_->levy_sim) {
        if (n2.size() != n1.size()) throw DomainError("second factor buffer has the wrong size");
        RngStream levy_rng(seed, path_id, 1);
        impl_->levy_sim->simulate(levy_rng, n2);
    }
}

void SpotPathGenerator::spot(std::uint64_t seed, std::uint64_t path_id, std::span<double> out) const {
    const std::size_t cols = impl_->grid.size();
    if (out.size() != cols) throw DomainError("spot buffer has the wrong size");
    if (impl_->levy_sim) {
        std::vector<double> n2(cols);
        factors(seed, path_id, out, n2);
        for (std::size_t j = 0; j < cols; ++j) out[j] = impl_->level[j] * std::exp(impl_->anchor[j] + out[j] + n2[j]);
    } else {
        factors(seed, path_id, out, {});
        for (std::size_t j = 0; j < cols; ++j) out[j] = impl_->level[j] * std::exp(impl_->anchor[j] + out[j]);
    }
}

FactorPaths factor_paths(std::uint64_t seed, const PathGrid& grid, const SpotModel& m,
                         Scheme scheme, std::size_t n_paths, unsigned threads) {
    const SpotPathGenerator gen(grid, m, scheme);
    FactorPaths out;
    const std::size_t cols = grid.size();
    out.n1 = PathMatrix{n_paths, cols, std::vector<double>(n_paths * cols)};
    if (m.levy) out.n2 = PathMatrix{n_paths, cols, std::vector<double>(n_paths * cols)};
    parallel_for(n_paths, threads, [&](std::size_t i) {
        std::span<double> n2;
        if (m.levy) n2 = {out.n2.data.data() + i * cols, cols};
        gen.factors(seed, i, {out.n1.data.data() + i * cols, cols}, n2);
    });
    return out;
}

PathMatrix spot_paths(std::uint64_t seed, const PathGrid& grid, const SpotModel& m, Scheme scheme,
                      std::size_t n_paths, unsigned threads) {
    const SpotPathGenerator gen(grid, m, scheme);
    const std::size_t cols = grid.size();
    PathMatrix s{n_paths, cols, std::vector<double>(n_paths * cols)};
    parallel_for(n_paths, threads,
                 [&](std::size_t i) { gen.spot(seed, i, {s.data.data() + i * cols, cols}); });
    return s;
}

std::complex<double> log_spot_chf(std::complex<double> u, double t, const SpotModel& m) {
    const std::complex<double> i(0.0, 1.0);
    // The n0 terms of h1 and of E[N1(t)] cancel in log S.
    double centre = std::log(m.curve.at(t)) - transition_cgf(1.0, t, m.ou);
    std::complex<double> exponent = transition_lch_gl(u, 0.0, t, m.ou);
    if (m.levy) {
        centre += rn_drift_levy(t, *m.levy);
        exponent += t * che_nts(u, *m.levy);
    }
    return std::exp(i * u * centre + exponent);
}

std::complex<double> log_spot_chf(double u, double t, const SpotModel& m) {
    if (t == 0.0) return std::exp(std::complex<double>(0.0, u * std::log(m.curve.at(0.0))));
    const std::complex<double> i(0.0, 1.0);
    double centre = std::log(m.curve.at(t)) - transition_cgf(1.0, t, m.ou);
    std::complex<double> exponent = transition_lch(u, t, m.ou);
    if (m.levy) {
        centre += rn_drift_levy(t, *m.levy);
        exponent += t * che_nts(u, *m.levy);
    }
    return std::exp(i * u * centre + exponent);
}

}  // namespace ounts
