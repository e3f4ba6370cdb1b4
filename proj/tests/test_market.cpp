#include <doctest.h>

#include <cmath>
#include <vector>

#include "ounts/errors.hpp"
#include "ounts/market.hpp"
#include "ounts/nts.hpp"
#include "ounts/rng.hpp"
#include "ounts/samplers.hpp"
#include "ounts/stats.hpp"
#include "test_support.hpp"

using namespace ounts;
using testing::nominal_ou;
using testing::strip_ou;

namespace {

const PathGrid kHorizons{{0.0, 1.0 / 12.0, 0.5, 1.0}};

// max |mean(S/F) - 1| in units of its standard error over the non-zero grid times
double worst_martingale_z(const SpotModel& m, std::size_t n, std::uint64_t seed) {
    const PathMatrix s = spot_paths(seed, kHorizons, m, Scheme::exact, n);
    double worst = 0.0;
    for (std::size_t j = 1; j < kHorizons.size(); ++j) {
        std::vector<double> ratio(n);
        for (std::size_t i = 0; i < n; ++i) ratio[i] = s(i, j) / m.curve.at(kHorizons.times[j]);
        const MeanEstimate e = mean_with_se(ratio);
        worst = std::max(worst, std::abs(e.mean - 1.0) / e.std_error);
    }
    return worst;
}

}  // namespace

TEST_SUITE("market_models") {

TEST_CASE("forward curve lookup and loading") {
    const ForwardCurve c({0, 31, 59}, {20.0, 21.0, 19.5});
    CHECK(c.at(0.0) == 20.0);
    CHECK(c.at(30.0 / 365.0) == 20.0);
    CHECK(c.at(31.0 / 365.0) == 21.0);
    CHECK(c.at(40.5 / 365.0) == 21.0);
    CHECK(c.at(2.0) == 19.5);
    CHECK(ForwardCurve::flat(7.0).at(123.0) == 7.0);
    CHECK_THROWS_AS(ForwardCurve({0, 0}, {1.0, 2.0}), ConfigError);
    CHECK_THROWS_AS(ForwardCurve({0}, {0.0}), ConfigError);

    testing::TempDir dir("curve");
    const std::string ok = dir.write("curve.csv", "date,price\n2024-01-01,20\n2024-02-01,21.5\n");
    const ForwardCurve loaded = ForwardCurve::load_csv(ok);
    CHECK(loaded.day_offsets() == std::vector<int>{0, 31});
    CHECK(loaded.at(31.0 / 365.0) == 21.5);
    const std::string bad = dir.write("bad.csv", "date,price\n2024-01-01,20\n2024-01-02,-1\n");
    CHECK_THROWS_AS(ForwardCurve::load_csv(bad), ConfigError);
    CHECK_THROWS_AS(ForwardCurve::load_csv(dir.file("missing.csv")), ConfigError);
}

TEST_CASE("one-factor drift") {
    CHECK(rn_drift_one_factor(0.5, make_ou_nts(0.5, 10.0, 0.0, 0.7)) == 0.0);
    CHECK(std::abs(rn_drift_one_factor(0.5, make_ou_nts(0.5, 10.0, 1e-6, 0.7))) < 1e-12);
    const OuNtsParams p = strip_ou();
    for (double t : {1.0 / 12.0, 1.0}) {
        const double a = rn_drift_one_factor(t, p, LchRoute::elementary);
        const double b = rn_drift_one_factor(t, p, LchRoute::hypergeometric);
        CHECK(std::abs(a - b) <= 1e-10);
    }
    for (double alpha : {0.2, 0.5, 0.8}) {
        for (double t = 1.0 / 365.0; t < 3.0; t *= 2.0) CHECK(rn_drift_one_factor(t, strip_ou(alpha)) <= 0.0);
    }
    // small-t behaviour: h(t) ~ -sigma^2 t / 2
    const double t = 1e-5;
    CHECK(rn_drift_one_factor(t, p) == doctest::Approx(-0.02 * t).epsilon(1e-3));
    OuNtsParams shifted = p;
    shifted.n0 = 0.4;
    CHECK(rn_drift_one_factor(0.3, shifted) ==
          doctest::Approx(rn_drift_one_factor(0.3, p) - 0.4 * std::exp(-3.0)).epsilon(1e-14));
}

TEST_CASE("Levy-factor drift") {
    CHECK(rn_drift_levy(0.7, make_nts(0.5, 0.0, 0.3, 0.0)) == 0.0);
    const NtsParams q = make_nts(0.5, 0.2, 0.3, -0.05);
    CHECK(rn_drift_levy(0.8, q) == doctest::Approx(2.0 * rn_drift_levy(0.4, q)).epsilon(1e-15));
    CHECK_THROWS_AS(rn_drift_levy(1.0, make_nts(0.5, 1.0, 2.0, 0.0)), DomainError);

    const double t = 1.0;
    const TsLaw law = q.subordinator(t);
    const double h = rn_drift_levy(t, q);
    RngStream rng(77, 0);
    std::vector<double> e(1000000);
    for (auto& x : e) {
        const double l = sample_ts(rng, law);
        x = std::exp(h + q.theta * l + q.sigma * std::sqrt(l) * sample_normal(rng));
    }
    const MeanEstimate m = mean_with_se(e);
    CHECK(std::abs(m.mean - 1.0) < 3.0 * m.std_error);
}

TEST_CASE("model invariants") {
    CHECK_THROWS_AS(SpotModel::one_factor(ForwardCurve::flat(20.0), make_ou_nts(0.5, 5.0, 1.0, 2.5)), DomainError);
    CHECK_THROWS_AS(SpotModel::two_factor(ForwardCurve::flat(20.0), strip_ou(), make_nts(0.5, 1.0, 2.0)),
                    DomainError);
    const SpotModel m = SpotModel::two_factor(ForwardCurve::flat(20.0), strip_ou(), make_nts(0.5, 0.2, 0.3, -0.05));
    CHECK(m.two_factor());
    CHECK(m.moment_bound() > 1.0);
    // at the bound the Levy exponential moment just ceases to exist
    const NtsParams q = *m.levy;
    const double s = m.moment_bound();
    if (s < m.ou.cgf_bound()) {
        CHECK(q.nu * (q.sigma * q.sigma * s * s / 2.0 + q.theta * s) == doctest::Approx(1.0 - q.alpha).epsilon(1e-12));
    }
}

TEST_CASE("degenerate volatility gives the forward curve") {
    const SpotModel m = SpotModel::two_factor(ForwardCurve::flat(20.0), make_ou_nts(0.5, 10.0, 0.0, 0.7),
                                              make_nts(0.5, 0.0, 0.3, 0.0));
    const PathMatrix s = spot_paths(3, PathGrid::uniform(1.0 / 12.0, 12), m, Scheme::exact, 16);
    for (double v : s.data) CHECK(v == doctest::Approx(20.0).epsilon(1e-15));
}

TEST_CASE("martingale property in both models") {
    const SpotModel one = SpotModel::one_factor(ForwardCurve::flat(20.0), strip_ou(0.3));
    CHECK(worst_martingale_z(one, 100000, 1) < 3.0);
    const SpotModel two = SpotModel::two_factor(ForwardCurve({0, 100, 200}, {20.0, 25.0, 18.0}), nominal_ou(0.7),
                                                make_nts(0.5, 0.25, 0.4, -0.03));
    CHECK(worst_martingale_z(two, 100000, 2) < 3.0);
}

TEST_CASE("factor variances add up") {
    const NtsParams q = make_nts(0.5, 0.25, 0.4, -0.03);
    const SpotModel m = SpotModel::two_factor(ForwardCurve::flat(20.0), nominal_ou(), q);
    const std::size_t n = 100000;
    const PathMatrix s = spot_paths(4, kHorizons, m, Scheme::exact, n);
    for (std::size_t j = 1; j < kHorizons.size(); ++j) {
        const double t = kHorizons.times[j];
        std::vector<double> logs(n);
        for (std::size_t i = 0; i < n; ++i) logs[i] = std::log(s(i, j));
        const CumulantEstimate c = estimate_cumulants(logs);
        // Var(theta L + sigma sqrt(L) X) = theta^2 Var L + sigma^2 E L with E L = t, Var L = nu t
        const double theory = ou_cumulant(2, t, m.ou) + q.theta * q.theta * q.nu * t + q.sigma * q.sigma * t;
        INFO("t=" << t);
        CHECK(std::abs(c.c2 - theory) < 3.0 * c.c2_se);
        CHECK(nts_cumulant(2, t, q) == doctest::Approx(q.theta * q.theta * q.nu * t + q.sigma * q.sigma * t));
    }
}

TEST_CASE("zeroed Levy factor reproduces the one-factor paths") {
    const OuNtsParams ou = strip_ou(0.3);
    const SpotModel one = SpotModel::one_factor(ForwardCurve::flat(20.0), ou);
    const SpotModel two = SpotModel::two_factor(ForwardCurve::flat(20.0), ou, make_nts(0.3, 0.0, 0.5, 0.0));
    const PathGrid grid = PathGrid::uniform(1.0 / 365.0, 40);
    const PathMatrix a = spot_paths(5, grid, one, Scheme::exact, 50);
    const PathMatrix b = spot_paths(5, grid, two, Scheme::exact, 50);
    CHECK(a.data == b.data);
}

TEST_CASE("paths do not depend on the thread count") {
    const SpotModel m = SpotModel::two_factor(ForwardCurve::flat(20.0), nominal_ou(0.35), make_nts(0.35, 0.2, 0.3));
    const PathGrid grid = PathGrid::uniform(1.0 / 52.0, 20);
    const PathMatrix a = spot_paths(6, grid, m, Scheme::exact, 500, 1);
    const PathMatrix b = spot_paths(6, grid, m, Scheme::exact, 500, 3);
    CHECK(a.data == b.data);
    const FactorPaths f = factor_paths(6, grid, m, Scheme::exact, 500, 2);
    CHECK(f.n1.rows == 500);
    CHECK(f.n2.cols == grid.size());
}

TEST_CASE("log-spot characteristic function") {
    const SpotModel m = SpotModel::two_factor(ForwardCurve::flat(20.0), nominal_ou(), make_nts(0.5, 0.25, 0.4, -0.03));
    CHECK(std::abs(log_spot_chf(0.0, 0.5, m) - 1.0) < 1e-15);
    for (double u = -40.0; u <= 40.0; u += 2.5) CHECK(std::abs(log_spot_chf(u, 0.5, m)) <= 1.0 + 1e-15);

    const std::size_t n = 100000;
    const double t = 0.5;
    const PathMatrix s = spot_paths(8, PathGrid{{0.0, t}}, m, Scheme::exact, n);
    for (double u : {1.0, 5.0}) {
        std::vector<double> re(n), im(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double x = u * std::log(s(i, 1));
            re[i] = std::cos(x);
            im[i] = std::sin(x);
        }
        const std::complex<double> phi = log_spot_chf(u, t, m);
        const MeanEstimate er = mean_with_se(re), ei = mean_with_se(im);
        INFO("u=" << u);
        CHECK(std::abs(er.mean - phi.real()) < 3.0 * er.std_error);
        CHECK(std::abs(ei.mean - phi.imag()) < 3.0 * ei.std_error);
    }
    // the complex-argument form agrees with the real one
    CHECK(std::abs(log_spot_chf(std::complex<double>(2.0, 0.0), t, m) - log_spot_chf(2.0, t, m)) < 1e-10);
    // E[S] = F through the chf at u = -i
    CHECK(std::abs(log_spot_chf(std::complex<double>(0.0, -1.0), t, m) - 20.0) < 1e-8);
}

}  // TEST_SUITE
