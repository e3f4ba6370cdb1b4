#include "ounts/pricing.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ounts/dates.hpp"
#include "ounts/errors.hpp"
#include "ounts/fft.hpp"
#include "ounts/stats.hpp"

namespace ounts {

namespace {

void check_times(const std::vector<double>& times, const char* what) {
    if (times.empty()) throw ConfigError(std::string(what) + ": at least one date is required");
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || !std::isfinite(times[i])) {
            throw ConfigError(std::string(what) + ": dates must be positive year fractions");
        }
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw ConfigError(std::string(what) + ": dates must be strictly increasing");
        }
    }
}

void check_strike(double k, const char* what) {
    if (!(k > 0.0) || !std::isfinite(k)) throw ConfigError(std::string(what) + ": strike must be positive");
}

// Running mean and centred sum of squares, mergeable in a fixed order.
struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    void merge(const Moments& o) {
        if (o.n == 0.0) return;
        const double total = n + o.n;
        const double d = o.mean - mean;
        mean += d * o.n / total;
        m2 += o.m2 + d * d * n * o.n / total;
        n = total;
    }
    double std_error() const { return n > 1.0 ? std::sqrt(m2 / (n - 1.0) / n) : 0.0; }
};

constexpr std::size_t kBlock = 1024;

}  // namespace

void CallStripSpec::validate() const {
    check_times(fixing_times, "call strip");
    check_strike(strike, "call strip");
}

CallStripSpec CallStripSpec::daily(int first_day, int last_day, double strike) {
    CallStripSpec s;
    for (int d = first_day; d <= last_day; ++d) s.fixing_times.push_back(d / kDaysPerYear);
    s.strike = strike;
    s.validate();
    return s;
}

void AsianSpec::validate() const {
    check_times(fixing_times, "asian");
    check_strike(strike, "asian");
}

AsianSpec AsianSpec::evenly_spaced(double t_first, double t_last, int count, double strike) {
    if (count < 1) throw ConfigError("asian: at least one fixing is required");
    AsianSpec s;
    s.strike = strike;
    if (count == 1) {
        s.fixing_times = {t_last};
    } else {
        for (int i = 0; i < count; ++i) {
            s.fixing_times.push_back(t_first + (t_last - t_first) * i / (count - 1));
        }
    }
    s.validate();
    return s;
}

void SwingSpec::validate() const {
    check_times(exercise_times, "swing");
    check_strike(strike, "swing");
    if (rights < 1 || static_cast<std::size_t>(rights) > exercise_times.size()) {
        std::ostringstream msg;
        msg << "swing: rights must lie in [1, " << exercise_times.size() << "], got " << rights;
        throw ConfigError(msg.str());
    }
    if (basis_degree < 0 || basis_degree > 6) throw ConfigError("swing: basis degree must lie in [0, 6]");
}

SwingSpec SwingSpec::final_year_daily(double maturity, int rights, double strike) {
    SwingSpec s;
    const int last = static_cast<int>(std::lround(maturity * kDaysPerYear));
    const int first = last - static_cast<int>(kDaysPerYear);
    if (first < 0) throw ConfigError("swing: maturity must be at least one year");
    for (int d = std::max(first, 1); d <= last; ++d) s.exercise_times.push_back(d / kDaysPerYear);
    s.rights = rights;
    s.strike = strike;
    s.validate();
    return s;
}

// ---------------------------------------------------------------- FFT

namespace {

class CarrMadan {
public:
    // Out-of-the-money calls are inverted with damping a > 0. In-the-money strikes
    // use a' = -1 - a, which yields the put, and the call follows from parity.
    enum Side { call = 0, put = 1 };

    CarrMadan(const SpotModel& m, const FftSettings& s) : m_(m), s_(s) {
        m_.validate();
        if (!(s_.damping > 0.0)) throw DomainError("FFT damping must be positive");
        const double bound = m_.moment_bound();
        if (!(s_.damping + 1.0 < bound)) {
            std::ostringstream msg;
            msg << "FFT damping " << s_.damping << " is infeasible: E[S^(1+damping)] exists only for "
                << "damping in (0, " << bound - 1.0 << ")";
            throw DomainError(msg.str());
        }
        if (!(s_.eta > 0.0)) throw DomainError("FFT eta must be positive");
        if (!(s_.tolerance > 0.0 && s_.tolerance < 1.0)) throw DomainError("FFT tolerance must lie in (0, 1)");
        // Simpson weights fold in a third of the price at log-strike distance pi/eta,
        // damped by exp(-damping pi/eta) and bounded by F; keep that below the tolerance.
        const double reach = std::log(4.0 / (3.0 * s_.tolerance)) / s_.damping;
        eta_ = std::min(s_.eta, std::numbers::pi / reach);
    }

    double damping(Side side) const { return side == call ? s_.damping : -1.0 - s_.damping; }

    Side side_for(double t, double strike) const {
        return std::log(strike) < std::log(m_.curve.at(t)) ? put : call;
    }

    std::complex<double> node(std::size_t j, Side side) const {
        return {static_cast<double>(j) * eta_, -(damping(side) + 1.0)};
    }

    double centre(double t) const {
        double c = std::log(m_.curve.at(t)) - transition_cgf(1.0, t, m_.ou);
        if (m_.levy) c += rn_drift_levy(t, *m_.levy);
        return c;
    }

    // phi(u) given the accumulated OU exponent at u.
    std::complex<double> chf(std::complex<double> u, double t, double c,
                             std::complex<double> ou_exponent) const {
        std::complex<double> e = std::complex<double>(0.0, 1.0) * u * c + ou_exponent;
        if (m_.levy) e += t * che_nts(u, *m_.levy);
        return std::exp(e);
    }

    double tail_error(double t, double strike, std::size_t n, Side side) const {
        const double v = static_cast<double>(n - 1) * eta_;
        const std::complex<double> u = node(n - 1, side);
        const std::complex<double> phi = chf(u, t, centre(t), transition_lch_gl(u, 0.0, t, m_.ou));
        return std::exp(-damping(side) * std::log(strike) - m_.rate * t) * std::abs(phi) /
               (std::numbers::pi * v);
    }

    std::size_t points_for(double t, double strike) const {
        const Side side = side_for(t, strike);
        std::size_t n = s_.min_points;
        const double target = s_.tolerance * m_.curve.at(t);
        while (n < s_.max_points && tail_error(t, strike, n, side) > target) n *= 2;
        return n;
    }

    // Call price at `strike` from accumulated OU exponents on the first n nodes of `side`.
    double price(double t, double strike, std::size_t n,
                 const std::vector<std::complex<double>>& ou_exponent) const {
        const Side side = side_for(t, strike);
        const double k0 = std::log(strike);
        const double a = damping(side);
        const double c = centre(t);
        const double disc = std::exp(-m_.rate * t);
        std::vector<std::complex<double>> x(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double v = static_cast<double>(j) * eta_;
            const std::complex<double> phi = chf(node(j, side), t, c, ou_exponent[j]);
            const std::complex<double> denom(a * a + a - v * v, (2.0 * a + 1.0) * v);
            const double w = j == 0 ? 1.0 / 3.0 : (j % 2 == 1 ? 4.0 / 3.0 : 2.0 / 3.0);
            // exp(-i v (k0 - pi / eta)) with v = j eta
            const double phase = -v * k0 + std::numbers::pi * static_cast<double>(j % 2);
            x[j] = std::polar(1.0, phase) * disc * phi / denom * (eta_ * w);
        }
        fft(x);
        const double value = std::exp(-a * k0) / std::numbers::pi * x[n / 2].real();
        if (side == call) return std::max(value, 0.0);
        return std::max(value, 0.0) + disc * (m_.curve.at(t) - strike);
    }

private:
    SpotModel m_;
    FftSettings s_;
    double eta_ = 0.25;
};

}  // namespace

StripResult price_call_strip_fft(const SpotModel& m, const CallStripSpec& spec,
                                 const FftSettings& settings) {
    spec.validate();
    const CarrMadan cm(m, settings);
    const std::size_t count = spec.fixing_times.size();
    std::vector<std::size_t> points(count);
    std::vector<CarrMadan::Side> sides(count);
    for (std::size_t i = 0; i < count; ++i) {
        points[i] = cm.points_for(spec.fixing_times[i], spec.strike);
        sides[i] = cm.side_for(spec.fixing_times[i], spec.strike);
    }
    // Nodes still needed by this or any later fixing, per side.
    std::vector<std::array<std::size_t, 2>> active(count, {0, 0});
    std::array<std::size_t, 2> running{0, 0};
    for (std::size_t i = count; i-- > 0;) {
        running[sides[i]] = std::max(running[sides[i]], points[i]);
        active[i] = running;
    }
    std::array<std::vector<std::complex<double>>, 2> acc{
        std::vector<std::complex<double>>(active.front()[0], {0.0, 0.0}),
        std::vector<std::complex<double>>(active.front()[1], {0.0, 0.0})};
    StripResult out;
    out.total.method = "fft";
    double prev = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = spec.fixing_times[i];
        for (const CarrMadan::Side side : {CarrMadan::call, CarrMadan::put}) {
            parallel_for(active[i][side], settings.threads, [&](std::size_t j) {
                acc[side][j] += transition_lch_gl(cm.node(j, side), prev, t, m.ou);
            });
        }
        prev = t;
        const double c = cm.price(t, spec.strike, points[i], acc[sides[i]]);
        out.fixings.push_back({t, c, 0.0});
        total += c;
    }
    out.total.value = total;
    return out;
}

double price_call_fft(const SpotModel& m, double t, double strike, const FftSettings& settings) {
    CallStripSpec spec;
    spec.fixing_times = {t};
    spec.strike = strike;
    return price_call_strip_fft(m, spec, settings).total.value;
}

// ---------------------------------------------------------------- MC strip

StripResult price_call_strip_mc(std::uint64_t seed, const SpotModel& m, const CallStripSpec& spec,
                                std::size_t n_paths, unsigned threads, Scheme scheme) {
    spec.validate();
    if (n_paths < 2) throw ConfigError("call strip MC needs at least 2 paths");
    const PathGrid grid = PathGrid::forward_start(spec.fixing_times);
    const SpotPathGenerator gen(grid, m, scheme);
    const std::size_t count = spec.fixing_times.size();
    std::vector<double> disc(count);
    for (std::size_t j = 0; j < count; ++j) disc[j] = std::exp(-m.rate * spec.fixing_times[j]);

    const std::size_t blocks = (n_paths + kBlock - 1) / kBlock;
    std::vector<std::vector<Moments>> per_block(blocks, std::vector<Moments>(count));
    std::vector<double> totals(n_paths);
    parallel_for(blocks, threads, [&](std::size_t b) {
        std::vector<double> s(grid.size());
        const std::size_t end = std::min(n_paths, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            gen.spot(seed, i, s);
            double total = 0.0;
            for (std::size_t j = 0; j < count; ++j) {
                const double pay = disc[j] * std::max(s[j + 1] - spec.strike, 0.0);
                total += pay;
                per_block[b][j].add(pay);
            }
            totals[i] = total;
        }
    });
    StripResult out;
    for (std::size_t j = 0; j < count; ++j) {
        Moments acc;
        for (std::size_t b = 0; b < blocks; ++b) acc.merge(per_block[b][j]);
        out.fixings.push_back({spec.fixing_times[j], acc.mean, acc.std_error()});
    }
    const MeanEstimate est = mean_with_se(totals);
    out.total = {est.mean, est.std_error, n_paths, std::string("mc_") + scheme_name(scheme), seed};
    return out;
}

// ---------------------------------------------------------------- Asian

AsianResult price_asian_mc(std::uint64_t seed, const SpotModel& m, const AsianSpec& spec,
                           std::size_t n_paths, unsigned threads) {
    spec.validate();
    if (n_paths < 2) throw ConfigError("asian MC needs at least 2 paths");
    // The first step jumps straight to the first fixing.
    const PathGrid grid = PathGrid::forward_start(spec.fixing_times);
    const SpotPathGenerator gen(grid, m, Scheme::exact);
    const double disc = std::exp(-m.rate * spec.fixing_times.back());
    const double fixings = static_cast<double>(spec.fixing_times.size());
    std::vector<double> calls(n_paths), puts(n_paths), averages(n_paths);
    const std::size_t blocks = (n_paths + kBlock - 1) / kBlock;
    parallel_for(blocks, threads, [&](std::size_t b) {
        std::vector<double> s(grid.size());
        const std::size_t end = std::min(n_paths, (b + 1) * kBlock);
        for (std::size_t i = b * kBlock; i < end; ++i) {
            gen.spot(seed, i, s);
            double sum = 0.0;
            for (std::size_t j = 1; j < s.size(); ++j) sum += s[j];
            const double avg = sum / fixings;
            averages[i] = avg;
            calls[i] = disc * std::max(avg - spec.strike, 0.0);
            puts[i] = disc * std::max(spec.strike - avg, 0.0);
        }
    });
    AsianResult out;
    const MeanEstimate c = mean_with_se(calls);
    const MeanEstimate p = mean_with_se(puts);
    out.call = {c.mean, c.std_error, n_paths, "mc_exact", seed};
    out.put = {p.mean, p.std_error, n_paths, "mc_exact", seed};
    out.mean_average = mean_with_se(averages).mean;
    return out;
}

// ---------------------------------------------------------------- Swing

SwingResult price_swing_lsmc(std::uint64_t seed, const SpotModel& m, const SwingSpec& spec,
                             std::size_t n_paths, unsigned threads) {
    spec.validate();
    const int degree_max = spec.basis_degree;
    if (n_paths < static_cast<std::size_t>(10 * (degree_max + 1))) {
        throw ConfigError("swing LSMC needs at least 10 paths per basis function");
    }
    const PathGrid grid = PathGrid::forward_start(spec.exercise_times);
    const PathMatrix s = spot_paths(seed, grid, m, Scheme::exact, n_paths, threads);
    const std::size_t dates = spec.exercise_times.size();
    const int rights = spec.rights;
    const auto n = static_cast<Eigen::Index>(n_paths);

    std::vector<double> disc(dates);
    for (std::size_t j = 0; j < dates; ++j) disc[j] = std::exp(-m.rate * spec.exercise_times[j]);
    auto payoff = [&](std::size_t i, std::size_t j) { return disc[j] * std::max(s(i, j + 1) - spec.strike, 0.0); };

    // coef[j] holds one column per rights level 1..rights (unused columns stay empty).
    std::vector<Eigen::MatrixXd> coef(dates);
    std::vector<int> degree(dates, degree_max);
    std::vector<double> scale(dates, 1.0);
    std::size_t reduced = 0;

    auto basis = [&](std::size_t j, double spot, int deg, auto&& row) {
        const double x = spot / scale[j];
        double p = 1.0;
        for (int k = 0; k <= deg; ++k) {
            row(k) = p;
            p *= x;
        }
    };

    // value[r] = realised discounted cash flow from the next date on with r rights left.
    Eigen::MatrixXd value = Eigen::MatrixXd::Zero(n, rights + 1);
    for (std::size_t jj = dates; jj-- > 0;) {
        const int remaining = static_cast<int>(dates - jj);
        const int regress_up_to = std::min(rights, remaining - 1);
        Eigen::MatrixXd cont;  // fitted continuation per path, columns 0..regress_up_to
        if (regress_up_to >= 1) {
            double mean_s = 0.0;
            for (Eigen::Index i = 0; i < n; ++i) mean_s += s(i, jj + 1);
            scale[jj] = mean_s / static_cast<double>(n);
            int deg = degree_max;
            Eigen::MatrixXd x;
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
            for (;; --deg) {
                x.resize(n, deg + 1);
                for (Eigen::Index i = 0; i < n; ++i) basis(jj, s(i, jj + 1), deg, x.row(i));
                qr.compute(x);
                if (qr.rank() == deg + 1 || deg == 0) break;
            }
            if (deg < degree_max) ++reduced;
            degree[jj] = deg;
            coef[jj] = qr.solve(value.middleCols(1, regress_up_to));
            cont = Eigen::MatrixXd::Zero(n, regress_up_to + 1);
            cont.rightCols(regress_up_to) = x * coef[jj];
        }
        for (int r = rights; r >= 1; --r) {
            for (Eigen::Index i = 0; i < n; ++i) {
                const double pay = payoff(static_cast<std::size_t>(i), jj);
                bool exercise = r >= remaining;
                if (!exercise) exercise = pay + cont(i, r - 1) > cont(i, r);
                if (exercise) value(i, r) = pay + value(i, r - 1);
            }
        }
    }

    // Forward pass: apply the stored policy on the same paths.
    std::vector<double> totals(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) {
        int r = rights;
        double total = 0.0;
        Eigen::RowVectorXd row(degree_max + 1);
        for (std::size_t j = 0; j < dates && r > 0; ++j) {
            const int remaining = static_cast<int>(dates - j);
            const double pay = payoff(i, j);
            bool exercise = r >= remaining;
            if (!exercise) {
                const int deg = degree[j];
                basis(j, s(i, j + 1), deg, row.head(deg + 1));
                const double keep = row.head(deg + 1).dot(coef[j].col(r - 1));
                const double used = r - 1 >= 1 ? row.head(deg + 1).dot(coef[j].col(r - 2)) : 0.0;
                exercise = pay + used > keep;
            }
            if (exercise) {
                total += pay;
                --r;
            }
        }
        totals[i] = total;
    }
    SwingResult out;
    const MeanEstimate est = mean_with_se(totals);
    out.value = {est.mean, est.std_error, n_paths, "lsmc", seed};
    if (reduced > 0) {
        std::ostringstream msg;
        msg << "regression basis was rank deficient on " << reduced
            << " exercise date(s); a lower polynomial degree was used there";
        out.warnings.push_back(msg.str());
    }
    return out;
}

}  // namespace ounts
