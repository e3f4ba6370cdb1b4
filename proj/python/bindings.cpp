#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ounts/calibration.hpp"
#include "ounts/commands.hpp"
#include "ounts/errors.hpp"
#include "ounts/pricing.hpp"
#include "ounts/special_functions.hpp"

namespace py = pybind11;
using namespace ounts;

namespace {

py::array_t<double> to_array(const PathMatrix& m) {
    py::array_t<double> a({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), a.mutable_data());
    return a;
}

SpotModel make_model(const OuNtsParams& ou, std::optional<NtsParams> levy, double forward, double rate) {
    if (levy) return SpotModel::two_factor(ForwardCurve::flat(forward), ou, *levy, rate);
    return SpotModel::one_factor(ForwardCurve::flat(forward), ou, rate);
}

RunConfig config_from(const std::map<std::string, std::string>& kv) { return build_config(kv); }

py::dict estimate_dict(const PriceEstimate& p) {
    py::dict d;
    d["value"] = p.value;
    d["stderr"] = p.std_error;
    d["n_paths"] = p.n_paths;
    d["method"] = p.method;
    d["seed"] = p.seed;
    return d;
}

}  // namespace

PYBIND11_MODULE(_ounts, m) {
    m.doc() = "OU normal tempered stable processes: transition laws, exact simulation, pricing, calibration";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

    py::class_<NtsParams>(m, "NtsParams")
        .def(py::init(&make_nts), py::arg("alpha"), py::arg("sigma"), py::arg("nu"), py::arg("theta") = 0.0)
        .def_readonly("alpha", &NtsParams::alpha)
        .def_readonly("sigma", &NtsParams::sigma)
        .def_readonly("nu", &NtsParams::nu)
        .def_readonly("theta", &NtsParams::theta)
        .def_property_readonly("beta", &NtsParams::beta)
        .def("__repr__", [](const NtsParams& p) {
            return "NtsParams(alpha=" + std::to_string(p.alpha) + ", sigma=" + std::to_string(p.sigma) +
                   ", nu=" + std::to_string(p.nu) + ", theta=" + std::to_string(p.theta) + ")";
        });

    py::class_<OuNtsParams>(m, "OuNtsParams")
        .def(py::init(&make_ou_nts), py::arg("alpha"), py::arg("b"), py::arg("sigma"), py::arg("nu"),
             py::arg("n0") = 0.0)
        .def_property_readonly("alpha", [](const OuNtsParams& p) { return p.nts.alpha; })
        .def_property_readonly("sigma", [](const OuNtsParams& p) { return p.nts.sigma; })
        .def_property_readonly("nu", [](const OuNtsParams& p) { return p.nts.nu; })
        .def_readonly("b", &OuNtsParams::b)
        .def_readonly("n0", &OuNtsParams::n0)
        .def("cgf_bound", &OuNtsParams::cgf_bound)
        .def("__repr__", [](const OuNtsParams& p) {
            return "OuNtsParams(alpha=" + std::to_string(p.nts.alpha) + ", b=" + std::to_string(p.b) +
                   ", sigma=" + std::to_string(p.nts.sigma) + ", nu=" + std::to_string(p.nts.nu) + ")";
        });

    m.def("gauss_2f1", &gauss_2f1, py::arg("a"), py::arg("b"), py::arg("c"), py::arg("x"));
    m.def(
        "transition_lch",
        [](double u, double t, const OuNtsParams& p, bool elementary) {
            return transition_lch(u, t, p, elementary ? LchRoute::elementary : LchRoute::hypergeometric);
        },
        py::arg("u"), py::arg("t"), py::arg("params"), py::arg("elementary") = false);
    m.def("transition_lch_oracle", &transition_lch_oracle, py::arg("u"), py::arg("t"), py::arg("params"));
    m.def(
        "transition_cgf", [](double s, double t, const OuNtsParams& p) { return transition_cgf(s, t, p); },
        py::arg("s"), py::arg("t"), py::arg("params"));
    m.def("ou_cumulant", &ou_cumulant, py::arg("k"), py::arg("t"), py::arg("params"));
    m.def("nts_cumulant", &nts_cumulant, py::arg("k"), py::arg("t"), py::arg("params"));

    m.def(
        "simulate_ou",
        [](std::uint64_t seed, const OuNtsParams& p, double dt, std::size_t steps, std::size_t n_paths,
           const std::string& scheme, unsigned threads) {
            const SpotModel model = SpotModel::one_factor(ForwardCurve::flat(1.0), p);
            const FactorPaths f = factor_paths(seed, PathGrid::uniform(dt, steps), model, parse_scheme(scheme),
                                               n_paths, threads);
            return to_array(f.n1);
        },
        py::arg("seed"), py::arg("params"), py::arg("dt"), py::arg("steps"), py::arg("n_paths"),
        py::arg("scheme") = "exact", py::arg("threads") = 0,
        "OU factor paths as an (n_paths, steps + 1) array; column 0 holds n0.");

    m.def(
        "simulate_spot",
        [](std::uint64_t seed, const OuNtsParams& ou, std::optional<NtsParams> levy, double forward,
           std::vector<double> times, std::size_t n_paths, const std::string& scheme, unsigned threads) {
            PathGrid grid{std::move(times)};
            return to_array(spot_paths(seed, grid, make_model(ou, levy, forward, 0.0), parse_scheme(scheme), n_paths,
                                       threads));
        },
        py::arg("seed"), py::arg("ou"), py::arg("levy") = py::none(), py::arg("forward") = 1.0, py::arg("times"),
        py::arg("n_paths"), py::arg("scheme") = "exact", py::arg("threads") = 0);

    m.def(
        "price_call_strip",
        [](const OuNtsParams& ou, std::optional<NtsParams> levy, double forward, std::vector<double> fixings,
           double strike, std::size_t mc_paths, std::uint64_t seed, double rate) {
            const SpotModel model = make_model(ou, levy, forward, rate);
            CallStripSpec spec{std::move(fixings), strike};
            const StripResult fft = price_call_strip_fft(model, spec);
            py::dict out;
            out["fft"] = fft.total.value;
            std::vector<double> per;
            for (const auto& f : fft.fixings) per.push_back(f.value);
            out["fft_fixings"] = per;
            if (mc_paths > 0) {
                const StripResult mc = price_call_strip_mc(seed, model, spec, mc_paths);
                out["mc"] = estimate_dict(mc.total);
                std::vector<double> v, se;
                for (const auto& f : mc.fixings) {
                    v.push_back(f.value);
                    se.push_back(f.std_error);
                }
                out["mc_fixings"] = v;
                out["mc_fixings_stderr"] = se;
            }
            return out;
        },
        py::arg("ou"), py::arg("levy") = py::none(), py::arg("forward"), py::arg("fixings"), py::arg("strike"),
        py::arg("mc_paths") = 0, py::arg("seed") = 1, py::arg("rate") = 0.0);

    m.def(
        "price_asian",
        [](const OuNtsParams& ou, std::optional<NtsParams> levy, double forward, double t_first, double t_last,
           int count, double strike, std::size_t n_paths, std::uint64_t seed) {
            const AsianResult a = price_asian_mc(seed, make_model(ou, levy, forward, 0.0),
                                                 AsianSpec::evenly_spaced(t_first, t_last, count, strike), n_paths);
            py::dict out;
            out["call"] = estimate_dict(a.call);
            out["put"] = estimate_dict(a.put);
            out["mean_average"] = a.mean_average;
            return out;
        },
        py::arg("ou"), py::arg("levy") = py::none(), py::arg("forward"), py::arg("t_first"), py::arg("t_last"),
        py::arg("count"), py::arg("strike"), py::arg("n_paths"), py::arg("seed") = 1);

    m.def(
        "price_swing",
        [](const OuNtsParams& ou, std::optional<NtsParams> levy, double forward, std::vector<double> exercise,
           int rights, double strike, std::size_t n_paths, std::uint64_t seed) {
            SwingSpec spec;
            spec.exercise_times = std::move(exercise);
            spec.rights = rights;
            spec.strike = strike;
            const SwingResult s = price_swing_lsmc(seed, make_model(ou, levy, forward, 0.0), spec, n_paths);
            py::dict out = estimate_dict(s.value);
            out["warnings"] = s.warnings;
            return out;
        },
        py::arg("ou"), py::arg("levy") = py::none(), py::arg("forward"), py::arg("exercise"), py::arg("rights"),
        py::arg("strike"), py::arg("n_paths"), py::arg("seed") = 1);

    m.def(
        "calibrate_synthetic",
        [](std::uint64_t seed) {
            const SyntheticMarketSpec truth;
            const SyntheticMarket mk = synthesize_market(seed, truth);
            const CalibrationResult r = calibrate(mk.day_ahead, mk.month_ahead, 0.5, seed);
            return calibration_json(r);
        },
        py::arg("seed"), "Round trip on a simulated market; returns the calibration JSON document.");

    m.def(
        "run_command",
        [](const std::string& command, const std::map<std::string, std::string>& config, bool synthetic) {
            const RunConfig c = config_from(config);
            CommandResult r;
            if (command == "simulate") r = cmd_simulate(c);
            else if (command == "validate") r = cmd_validate(c);
            else if (command == "price") r = cmd_price(c);
            else if (command == "calibrate") r = cmd_calibrate(c, synthetic);
            else throw ConfigError("unknown command '" + command + "'");
            return r.payload;
        },
        py::arg("command"), py::arg("config"), py::arg("synthetic") = false,
        "Runs a CLI command on a flat dotted-key config and returns its output document.");
}
