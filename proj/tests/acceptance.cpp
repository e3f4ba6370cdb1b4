// Acceptance harness: `acceptance <n>` runs criterion n (1-11) and prints one
// PASS/FAIL line plus the measured quantities behind it.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "ounts/calibration.hpp"
#include "ounts/errors.hpp"
#include "ounts/market.hpp"
#include "ounts/ou_nts.hpp"
#include "ounts/pricing.hpp"
#include "ounts/quadrature.hpp"
#include "ounts/samplers.hpp"
#include "ounts/simulation.hpp"
#include "ounts/special_functions.hpp"
#include "ounts/stats.hpp"
#include "test_support.hpp"

using namespace ounts;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << "  FAILED: " << what << '\n';
        }
    }
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::vector<double> u_grid() {
    std::vector<double> u;
    for (int i = 0; i < 33; ++i) u.push_back(-50.0 + 100.0 * i / 32.0);
    return u;
}

const std::vector<double> kTimes{1.0 / 365.0, 1.0 / 12.0, 1.0};
const std::vector<double> kAlphas{0.2, 0.35, 0.5, 0.65, 0.8};

// Two-factor parameters used for the Asian and swing contracts. The fitted
// values behind those contracts are not available, so a plausible set is used.
SpotModel contract_model() {
    return SpotModel::two_factor(ForwardCurve::flat(12.0), make_ou_nts(0.5, 5.0, 0.3, 2.5),
                                 make_nts(0.5, 0.25, 0.4, -0.03));
}

// ---------------------------------------------------------------------------

void c01(Outcome& o) {
    Stopwatch sw;
    double worst = 0.0;
    for (double alpha : kAlphas) {
        const OuNtsParams p = testing::nominal_ou(alpha);
        for (double t : kTimes) {
            for (double u : u_grid()) {
                const double closed = transition_lch(u, t, p);
                const double oracle = transition_lch_oracle(u, t, p);
                const double dev = oracle == 0.0 ? std::abs(closed) : std::abs(closed - oracle) / std::abs(oracle);
                worst = std::max(worst, dev);
            }
        }
    }
    const double secs = sw.seconds();
    o.detail << "  max relative deviation " << worst << " over 5 x 3 x 33 points, " << secs << " s\n";
    o.require(worst <= 1e-8, "relative deviation <= 1e-8");
    o.require(secs < 30.0, "runtime < 30 s");
}

void c02(Outcome& o) {
    Stopwatch sw;
    const OuNtsParams p = testing::nominal_ou(0.5);
    double worst_lch = 0.0;
    for (double t : kTimes) {
        for (double u : u_grid()) {
            const double h = transition_lch(u, t, p, LchRoute::hypergeometric);
            const double e = transition_lch(u, t, p, LchRoute::elementary);
            worst_lch = std::max(worst_lch, std::abs(h - e) / std::max(1.0, std::abs(e)));
        }
    }
    double worst_f = 0.0;
    for (double x = 0.0; x <= 1e6; x = x == 0.0 ? 1e-8 : x * 1.5) {
        const double e = std::sqrt(x + 1.0) - std::sqrt(x) * std::asinh(std::sqrt(x));
        worst_f = std::max(worst_f, std::abs(gauss_2f1(-0.5, -0.5, 0.5, -x) - e) / std::max(1.0, std::abs(e)));
    }
    const double secs = sw.seconds();
    o.detail << "  lch routes: max deviation " << worst_lch << "; 2F1 vs elementary form on [0, 1e6]: " << worst_f
             << ", " << secs << " s\n";
    o.require(worst_lch <= 1e-10, "lch routes agree to 1e-10");
    o.require(worst_f <= 1e-10, "2F1 equals the elementary form to 1e-10");
    o.require(secs < 5.0, "runtime < 5 s");
}

struct CumulantCheck {
    CumulantEstimate est;
    double c2_theory = 0.0;
    double c4_theory = 0.0;
    bool c2_ok() const { return std::abs(est.c2 - c2_theory) <= 3.0 * est.c2_se; }
    bool c4_ok() const { return std::abs(est.c4 - c4_theory) <= 3.0 * est.c4_se; }
};

CumulantCheck cumulant_check(Scheme scheme, double dt, std::size_t n, std::uint64_t seed) {
    const OuNtsParams p = testing::nominal_ou(0.5);
    const StepDecomposition dec = step_decomposition(dt, p);
    std::vector<double> x(n);
    parallel_for(n, 0, [&](std::size_t i) {
        RngStream rng(seed, i);
        x[i] = scheme == Scheme::exact ? sample_increment_exact(rng, dec, p)
                                       : sample_increment_approx(rng, dec, p, scheme);
    });
    return {estimate_cumulants(x), ou_cumulant(2, dt, p), ou_cumulant(4, dt, p)};
}

void report(Outcome& o, const char* label, double dt, const CumulantCheck& c) {
    o.detail << "  " << label << " dt=" << dt << ": c2 " << c.est.c2 << " (theory " << c.c2_theory << ", se "
             << c.est.c2_se << ", err% " << 100.0 * err_pct(c.c2_theory, c.est.c2) << "), c4 " << c.est.c4
             << " (theory " << c.c4_theory << ", se " << c.est.c4_se << ")\n";
}

void c03(Outcome& o) {
    Stopwatch sw;
    for (double dt : {1.0 / 365.0, 1.0 / 12.0}) {
        const CumulantCheck c = cumulant_check(Scheme::exact, dt, 1000000, 3);
        report(o, "exact", dt, c);
        o.require(c.c2_ok(), "c2 within 3 SE");
        o.require(c.c4_ok(), "c4 within 3 SE");
    }
    const double secs = sw.seconds();
    o.detail << "  " << secs << " s\n";
    o.require(secs < 300.0, "runtime < 5 min");
}

void c04(Outcome& o) {
    Stopwatch sw;
    const double dt = 1.0 / 12.0;
    const CumulantCheck a2 = cumulant_check(Scheme::approx2, dt, 1000000, 4);
    const CumulantCheck a1 = cumulant_check(Scheme::approx1, dt, 1000000, 4);
    const CumulantCheck ex = cumulant_check(Scheme::exact, dt, 1000000, 4);
    report(o, "approx2", dt, a2);
    report(o, "approx1", dt, a1);
    report(o, "exact", dt, ex);
    o.require(std::abs(err_pct(a2.c2_theory, a2.est.c2)) > 0.10, "approx2 |err%| of c2 > 10%");
    o.require(!(a1.c2_ok() && a1.c4_ok()), "approx1 fails the 3-SE test");
    o.require(ex.c2_ok() && ex.c4_ok(), "exact scheme passes the 3-SE test");
    const double secs = sw.seconds();
    o.detail << "  " << secs << " s\n";
    o.require(secs < 300.0, "runtime < 5 min");
}

void c05(Outcome& o) {
    double worst_v = 0.0, worst_j = 0.0;
    for (double omega : {1e-4, 0.05, 0.4346, 0.8, 0.99}) {
        for (double alpha : {0.2, 0.5, 0.8}) {
            const double iv = integrate_adaptive([&](double v) { return v_density(v, omega, alpha); }, 1.0,
                                                 1.0 / omega, 1e-13, 1e-13)
                                  .value;
            worst_v = std::max(worst_v, std::abs(iv - 1.0));
            // omega = exp(-2 b dt) for the nominal parameters
            const OuNtsParams p = testing::nominal_ou(alpha);
            const StepDecomposition d = step_decomposition(-std::log(omega) / (2.0 * p.b), p);
            const auto f = [&](double x) { return jump_density(x, d, p); };
            const double ij =
                integrate_tanh_sinh(f, 0.0, 1.0, 1e-12).value + integrate_to_infinity(f, 1.0, 1e-12).value;
            worst_j = std::max(worst_j, std::abs(ij - 1.0));
        }
    }
    o.detail << "  max |int f_V - 1| = " << worst_v << ", max |int f_J - 1| = " << worst_j << '\n';
    o.require(worst_v <= 1e-8, "f_V normalised to 1e-8");
    o.require(worst_j <= 1e-8, "f_J normalised to 1e-8");

    const std::size_t n = 1000000;
    const double critical = 1.628 / std::sqrt(static_cast<double>(n));
    for (auto [omega, alpha] : std::vector<std::pair<double, double>>{{0.4346, 0.5}, {0.05, 0.3}, {0.9, 0.8}}) {
        std::vector<double> v(n);
        parallel_for(n, 0, [&](std::size_t i) {
            RngStream rng(5, i);
            v[i] = sample_v(rng, omega, alpha);
        });
        std::sort(v.begin(), v.end());
        // quadrature CDF on a fine grid, linearly interpolated between nodes
        const std::size_t nodes = 4000;
        std::vector<double> xs(nodes + 1), cdf(nodes + 1, 0.0);
        for (std::size_t k = 0; k <= nodes; ++k) xs[k] = 1.0 + (1.0 / omega - 1.0) * k / nodes;
        for (std::size_t k = 1; k <= nodes; ++k) {
            cdf[k] = cdf[k - 1] + integrate_adaptive([&](double x) { return v_density(x, omega, alpha); }, xs[k - 1],
                                                     xs[k], 1e-15, 1e-13)
                                      .value;
        }
        double d = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double x = v[i];
            const auto it = std::upper_bound(xs.begin(), xs.end(), x);
            const std::size_t k = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xs.begin(), 1), nodes);
            const double w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
            const double f = cdf[k - 1] + w * (cdf[k] - cdf[k - 1]);
            d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
        }
        o.detail << "  KS statistic (omega=" << omega << ", alpha=" << alpha << "): " << d << " (99% critical "
                 << critical << ")\n";
        o.require(d < critical, "sample_v passes KS at 99%");
    }
}

void c06(Outcome& o) {
    const PathGrid grid{{0.0, 1.0 / 12.0, 0.5, 1.0}};
    const std::size_t n = 100000;
    const std::vector<std::pair<const char*, SpotModel>> models{
        {"one-factor", SpotModel::one_factor(ForwardCurve::flat(20.0), testing::strip_ou(0.5))},
        {"two-factor", SpotModel::two_factor(ForwardCurve({0, 91, 182, 273}, {20.0, 17.0, 15.0, 19.0}),
                                             testing::nominal_ou(0.5), make_nts(0.5, 0.25, 0.4, -0.03))}};
    for (const auto& [name, m] : models) {
        const PathMatrix s = spot_paths(6, grid, m, Scheme::exact, n);
        for (std::size_t j = 1; j < grid.size(); ++j) {
            std::vector<double> ratio(n);
            for (std::size_t i = 0; i < n; ++i) ratio[i] = s(i, j) / m.curve.at(grid.times[j]);
            const MeanEstimate e = mean_with_se(ratio);
            const double z = (e.mean - 1.0) / e.std_error;
            o.detail << "  " << name << " t=" << grid.times[j] << ": mean S/F " << e.mean << ", se " << e.std_error
                     << ", z " << z << '\n';
            o.require(std::abs(z) <= 3.0, std::string(name) + " martingale within 3 SE");
        }
    }
}

void c07(Outcome& o) {
    Stopwatch sw;
    CallStripSpec spec;
    for (int m = 1; m <= 12; ++m) spec.fixing_times.push_back(m / 12.0);
    spec.strike = 20.0;
    std::vector<double> totals;
    for (double alpha : {0.3, 0.5, 0.7}) {
        const SpotModel m = SpotModel::one_factor(ForwardCurve::flat(20.0), testing::strip_ou(alpha));
        const StripResult fft = price_call_strip_fft(m, spec);
        const StripResult mc = price_call_strip_mc(7, m, spec, 100000);
        double worst_z = 0.0;
        for (std::size_t i = 0; i < spec.fixing_times.size(); ++i) {
            const double z = std::abs(fft.fixings[i].value - mc.fixings[i].value) / mc.fixings[i].std_error;
            worst_z = std::max(worst_z, z);
        }
        o.detail << "  alpha=" << alpha << ": FFT strip " << fft.total.value << ", MC " << mc.total.value << " (se "
                 << mc.total.std_error << "), max per-fixing |z| " << worst_z << '\n';
        o.require(worst_z <= 3.0, "per-fixing |FFT - MC| <= 3 SE");
        totals.push_back(fft.total.value);
    }
    o.require(totals[0] < totals[1] && totals[1] < totals[2], "strip value increases with alpha");
    const double secs = sw.seconds();
    o.detail << "  " << secs << " s\n";
    o.require(secs < 600.0, "runtime < 10 min");
}

void c08(Outcome& o) {
    const SpotModel m = contract_model();
    const AsianSpec spec = AsianSpec::evenly_spaced(0.25, 0.5, 90, 11.5);
    const AsianResult small = price_asian_mc(1, m, spec, 10000);
    const AsianResult large = price_asian_mc(1, m, spec, 40000);
    for (const AsianResult* r : {&small, &large}) {
        const double parity = r->call.value - r->put.value - std::exp(-m.rate * 0.5) * (r->mean_average - 11.5);
        o.detail << "  n=" << r->call.n_paths << ": call " << r->call.value << " (se " << r->call.std_error
                 << "), put " << r->put.value << ", parity residual " << parity << '\n';
        o.require(std::abs(parity) <= 1e-12, "sample put-call parity to 1e-12");
    }
    const double ratio = small.call.std_error / large.call.std_error;
    o.detail << "  stderr ratio 1e4 / 4e4 = " << ratio << '\n';
    o.require(std::abs(ratio / 2.0 - 1.0) <= 0.2, "stderr halves within 20% when paths quadruple");
}

void c09(Outcome& o) {
    Stopwatch sw;
    const SpotModel m = contract_model();
    const SwingSpec contract = SwingSpec::final_year_daily(1.0 + 1.0 / 3.0, 120, 11.5);

    SwingSpec full = contract;
    full.rights = static_cast<int>(full.exercise_times.size());
    const SwingResult sf = price_swing_lsmc(9, m, full, 10000);
    const StripResult strip = price_call_strip_mc(9, m, CallStripSpec{full.exercise_times, 11.5}, 10000);
    const double gap = std::abs(sf.value.value - strip.total.value);
    o.detail << "  N = M_S = " << full.rights << ": swing " << sf.value.value << ", strip " << strip.total.value
             << ", |diff| " << gap << '\n';
    o.require(gap <= 1e-12, "full-exercise swing equals the strip on shared paths");

    double prev = -1e300, prev_se = 0.0;
    for (int n : {1, 30, 60, 120}) {
        SwingSpec a = contract, b = contract;
        a.rights = n;
        b.rights = n + 1;
        const SwingResult ra = price_swing_lsmc(10, m, a, 10000);
        const SwingResult rb = price_swing_lsmc(10, m, b, 10000);
        o.detail << "  N=" << n << ": " << ra.value.value << " (se " << ra.value.std_error << "), N=" << n + 1
                 << ": " << rb.value.value << " (se " << rb.value.std_error << ")\n";
        o.require(ra.value.value <= rb.value.value + 2.0 * (ra.value.std_error + rb.value.std_error),
                  "value(N) <= value(N+1) + 2 (se_N + se_N+1)");
        o.require(prev <= ra.value.value + 2.0 * (ra.value.std_error + prev_se), "value monotone over N grid");
        prev = ra.value.value;
        prev_se = ra.value.std_error;
    }

    std::vector<double> values, errors;
    for (std::uint64_t seed : {101, 202, 303}) {
        const SwingResult r = price_swing_lsmc(seed, m, contract, 20000);
        values.push_back(r.value.value);
        errors.push_back(r.value.std_error);
        for (const auto& w : r.warnings) o.detail << "  warning: " << w << '\n';
    }
    const double range = *std::max_element(values.begin(), values.end()) -
                         *std::min_element(values.begin(), values.end());
    const double se = (errors[0] + errors[1] + errors[2]) / 3.0;
    o.detail << "  120-120 at 2e4 paths: " << values[0] << ", " << values[1] << ", " << values[2] << "; range "
             << range << " vs 4 SE = " << 4.0 * se << '\n';
    o.require(range <= 4.0 * se, "120-120 value stable across seeds within 4 SE");
    const double secs = sw.seconds();
    o.detail << "  " << secs << " s\n";
    o.require(secs < 1200.0, "runtime < 20 min");
}

void c10(Outcome& o) {
    Stopwatch sw;
    const SyntheticMarketSpec truth;
    for (std::uint64_t seed : {1, 2, 3}) {
        const SyntheticMarket mk = synthesize_market(seed, truth);
        const CalibrationResult fit = calibrate(mk.day_ahead, mk.month_ahead, 0.5, seed);
        const RoundTripReport r = check_round_trip(truth, fit);
        o.detail << "  seed " << seed << ": b " << fit.ou.b << " (" << 100 * r.b_rel << "%), sigma1 "
                 << fit.ou.nts.sigma << " (" << 100 * r.sigma1_rel << "%), nu1 " << fit.ou.nts.nu << " ("
                 << 100 * r.nu1_rel << "%), sigma2 " << fit.levy.sigma << " (" << 100 * r.sigma2_rel << "%), nu2 "
                 << fit.levy.nu << " (" << 100 * r.nu2_rel << "%), theta2 " << fit.levy.theta << " (abs err "
                 << r.theta2_abs << ")\n";
        o.require(r.b_ok, "b within 10%");
        o.require(r.sigma1_ok, "sigma1 within 5%");
        o.require(r.nu1_ok, "nu1 within 15%");
        o.require(r.sigma2_ok, "sigma2 within 5%");
        o.require(r.nu2_ok, "nu2 within 15%");
        o.require(r.theta2_ok, "theta2 within 0.02");
    }
    const double secs = sw.seconds();
    o.detail << "  " << secs << " s\n";
    o.require(secs < 600.0, "runtime < 10 min");
}

struct CliOutput {
    int code = -1;
    std::string payload;
};

CliOutput run_cli(const testing::TempDir& dir, const std::string& args, const std::string& tag) {
    const std::string out = dir.file(tag + ".out");
    const std::string cmd = std::string(OUNTS_CLI_PATH) + " " + args + " --out " + out + " 2> " + dir.file(tag + ".err");
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, testing::read_file(out)};
}

void c11(Outcome& o) {
    testing::TempDir dir("determinism");
    const std::string one = "model.alpha = 0.35\nmodel.ou.b = 10\nmodel.ou.sigma = 0.2\nmodel.ou.nu = 0.7\n"
                            "model.curve.flat = 20\n";
    const std::string two = "model.alpha = 0.5\nmodel.ou.b = 5\nmodel.ou.sigma = 0.3\nmodel.ou.nu = 2.5\n"
                            "model.levy.sigma = 0.25\nmodel.levy.nu = 0.4\nmodel.levy.theta = -0.03\n"
                            "model.curve.flat = 12\n";
    const std::map<std::string, std::string> runs{
        {"simulate", "simulate --config " +
                         dir.write("sim.cfg", two + "run.n_paths = 300\nsimulate.steps = 60\noutput.format = csv\n")},
        {"simulate_factor",
         "simulate --config " + dir.write("simf.cfg", one + "run.n_paths = 300\nsimulate.output = factor\n")},
        {"validate", "validate --config " +
                         dir.write("val.cfg", "model.ou.b = 5\nmodel.ou.sigma = 0.3\nmodel.ou.nu = 2.5\n"
                                              "model.curve.flat = 1\nvalidate.paths = 1000,20000\n")},
        {"price_strip", "price --config " + dir.write("strip.cfg", one + "contract.type = call_strip\n"
                                                                         "contract.strike = 20\ncontract.first_day = 1\n"
                                                                         "contract.last_day = 31\nrun.n_paths = 5000\n")},
        {"price_asian", "price --config " +
                            dir.write("asian.cfg", two + "contract.type = asian\ncontract.strike = 11.5\n"
                                                         "contract.t_first = 0.25\ncontract.t_last = 0.5\n"
                                                         "contract.count = 90\nrun.n_paths = 5000\n")},
        {"price_swing", "price --config " +
                            dir.write("swing.cfg", two + "contract.type = swing\ncontract.strike = 11.5\n"
                                                         "contract.rights = 120\ncontract.maturity = 4/3\n"
                                                         "run.n_paths = 2000\noutput.format = csv\n")},
        {"calibrate", "calibrate --synthetic"},
    };
    for (const auto& [name, args] : runs) {
        const CliOutput a = run_cli(dir, args + " --seed 99 --threads 1", name + "_t1");
        const CliOutput b = run_cli(dir, args + " --seed 99 --threads 4", name + "_t4");
        const CliOutput c = run_cli(dir, args + " --seed 99 --threads 2", name + "_t2");
        const bool same = a.code == 0 && b.code == 0 && c.code == 0 && !a.payload.empty() && a.payload == b.payload &&
                          a.payload == c.payload;
        o.detail << "  " << name << ": exit codes " << a.code << '/' << b.code << '/' << c.code << ", "
                 << a.payload.size() << " bytes, " << (same ? "identical" : "DIFFERENT") << " across 1/4/2 threads\n";
        o.require(same, name + " output is bit-identical across thread counts");
    }
}

}  // namespace

int main(int argc, char** argv) {
    const std::map<int, std::pair<const char*, std::function<void(Outcome&)>>> criteria{
        {1, {"closed-form lch vs quadrature oracle", c01}},
        {2, {"alpha = 1/2 elementary identity", c02}},
        {3, {"exact-simulation cumulants", c03}},
        {4, {"approximate-scheme bias", c04}},
        {5, {"density normalisations and f_V sampler", c05}},
        {6, {"martingale property", c06}},
        {7, {"FFT vs MC call strip", c07}},
        {8, {"Asian engine", c08}},
        {9, {"swing engine", c09}},
        {10, {"calibration round trip", c10}},
        {11, {"CLI determinism", c11}},
    };
    std::vector<int> which;
    if (argc < 2 || std::string(argv[1]) == "all") {
        for (const auto& [k, v] : criteria) which.push_back(k);
    } else {
        for (int i = 1; i < argc; ++i) which.push_back(std::atoi(argv[i]));
    }
    bool all_pass = true;
    for (int k : which) {
        const auto it = criteria.find(k);
        if (it == criteria.end()) {
            std::fprintf(stderr, "unknown criterion %d\n", k);
            return 2;
        }
        Outcome o;
        try {
            it->second.second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << "  exception: " << e.what() << '\n';
        }
        std::printf("%s", o.detail.str().c_str());
        std::printf("criterion %d (%s): %s\n", k, it->second.first, o.pass ? "PASS" : "FAIL");
        std::fflush(stdout);
        all_pass = all_pass && o.pass;
    }
    return all_pass ? 0 : 1;
}
