#include "ounts/commands.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ounts/dates.hpp"
#include "ounts/errors.hpp"
#include "ounts/stats.hpp"

namespace ounts {

namespace {

using Json = nlohmann::ordered_json;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void require_model(const RunConfig& c) {
    if (!c.model_given) throw ConfigError("model.ou.b: required (no model section in the configuration)");
}

std::string contract_name(ContractType t) {
    switch (t) {
        case ContractType::call_strip: return "call_strip";
        case ContractType::asian: return "asian";
        case ContractType::swing: return "swing";
        case ContractType::none: break;
    }
    return "none";
}

Json record(const RunConfig& c, const std::string& contract, const PriceEstimate& p) {
    Json j;
    j["contract"] = contract;
    j["method"] = p.method;
    j["value"] = p.value;
    j["stderr"] = p.std_error;
    j["n_paths"] = p.n_paths;
    j["seed"] = c.seed;
    j["params_digest"] = c.params_digest();
    return j;
}

std::string csv_records(const std::vector<Json>& rows) {
    std::ostringstream out;
    out << "contract,method,value,stderr,n_paths,seed,params_digest\n";
    for (const Json& r : rows) {
        out << r["contract"].get<std::string>() << ',' << r["method"].get<std::string>() << ','
            << num(r["value"].get<double>()) << ',' << num(r["stderr"].get<double>()) << ','
            << r["n_paths"].get<std::size_t>() << ',' << r["seed"].get<std::uint64_t>() << ','
            << r["params_digest"].get<std::string>() << '\n';
    }
    return out.str();
}

Json ou_json(const OuNtsParams& p) {
    Json j;
    j["alpha"] = p.nts.alpha;
    j["b"] = p.b;
    j["sigma"] = p.nts.sigma;
    j["nu"] = p.nts.nu;
    j["n0"] = p.n0;
    return j;
}

Json levy_json(const NtsParams& p) {
    Json j;
    j["alpha"] = p.alpha;
    j["sigma"] = p.sigma;
    j["nu"] = p.nu;
    j["theta"] = p.theta;
    return j;
}

Json seasonality_json(const SeasonalityFit& s) {
    Json j;
    j["origin"] = format_iso_date(s.origin_day);
    j["intercept"] = s.intercept;
    j["slope"] = s.slope;
    j["amp1"] = s.amp1;
    j["phase1"] = s.phase1;
    j["amp2"] = s.amp2;
    j["phase2"] = s.phase2;
    return j;
}

}  // namespace

// ---------------------------------------------------------------- simulate

CommandResult cmd_simulate(const RunConfig& c) {
    require_model(c);
    c.model.ou.validate();
    const PathGrid grid = PathGrid::uniform(c.sim_dt, c.sim_steps);
    CommandResult res;
    std::ostringstream note;
    note << "simulate: seed=" << c.seed << " scheme=" << scheme_name(c.scheme) << " paths=" << c.n_paths
         << " points=" << grid.size();
    res.notes.push_back(note.str());

    PathMatrix main;
    PathMatrix second;
    std::string column = "S";
    if (c.sim_factor) {
        FactorPaths f = factor_paths(c.seed, grid, c.model, c.scheme, c.n_paths, c.threads);
        main = std::move(f.n1);
        second = std::move(f.n2);
        column = "N";
    } else {
        c.model.validate();
        main = spot_paths(c.seed, grid, c.model, c.scheme, c.n_paths, c.threads);
    }
    const bool has_second = second.rows > 0;
    if (c.format == "csv") {
        std::string out = "path_id,t," + column + (has_second ? ",N2" : "") + "\n";
        out.reserve(out.size() + main.rows * main.cols * 48);
        for (std::size_t i = 0; i < main.rows; ++i) {
            for (std::size_t j = 0; j < main.cols; ++j) {
                out += std::to_string(i);
                out += ',';
                out += num(grid.times[j]);
                out += ',';
                out += num(main(i, j));
                if (has_second) {
                    out += ',';
                    out += num(second(i, j));
                }
                out += '\n';
            }
        }
        res.payload = std::move(out);
        return res;
    }
    Json j;
    j["seed"] = c.seed;
    j["scheme"] = scheme_name(c.scheme);
    j["column"] = column;
    j["params_digest"] = c.params_digest();
    j["times"] = grid.times;
    Json paths = Json::array();
    for (std::size_t i = 0; i < main.rows; ++i) {
        const auto row = main.row(i);
        paths.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["paths"] = std::move(paths);
    if (has_second) {
        Json p2 = Json::array();
        for (std::size_t i = 0; i < second.rows; ++i) {
            const auto row = second.row(i);
            p2.push_back(std::vector<double>(row.begin(), row.end()));
        }
        j["paths_n2"] = std::move(p2);
    }
    res.payload = j.dump(1) + "\n";
    return res;
}

// ---------------------------------------------------------------- validate

CommandResult cmd_validate(const RunConfig& c) {
    require_model(c);
    OuNtsParams p = c.model.ou;
    p.n0 = 0.0;
    p.validate();
    CommandResult res;
    Json rows = Json::array();
    const std::size_t max_n = c.validate_paths.back();
    for (Scheme scheme : c.validate_schemes) {
        for (double dt : c.validate_dts) {
            const OuPathSimulator sim(PathGrid::uniform(dt, 1), p, scheme);
            std::vector<double> z(max_n);
            constexpr std::size_t block = 4096;
            parallel_for((max_n + block - 1) / block, c.threads, [&](std::size_t b) {
                double buf[2];
                for (std::size_t i = b * block; i < std::min(max_n, (b + 1) * block); ++i) {
                    RngStream rng(c.seed, i);
                    sim.simulate(rng, std::span<double>(buf, 2));
                    z[i] = buf[1];
                }
            });
            const double th2 = ou_cumulant(2, dt, p);
            const double th4 = ou_cumulant(4, dt, p);
            for (std::size_t n : c.validate_paths) {
                const CumulantEstimate e = estimate_cumulants(std::span<const double>(z.data(), n));
                const bool ok2 = std::fabs(e.c2 - th2) <= 3.0 * e.c2_se;
                const bool ok4 = std::fabs(e.c4 - th4) <= 3.0 * e.c4_se;
                const double err2 = err_pct(th2, e.c2);
                std::string status = ok2 && ok4 ? "PASS" : (std::fabs(err2) > 0.10 ? "BIASED" : "FAIL");
                Json r;
                r["scheme"] = scheme_name(scheme);
                r["dt"] = dt;
                r["n_paths"] = n;
                r["c2"] = e.c2;
                r["c2_se"] = e.c2_se;
                r["c2_theory"] = th2;
                r["c2_err_pct"] = err2;
                r["c4"] = e.c4;
                r["c4_se"] = e.c4_se;
                r["c4_theory"] = th4;
                r["c4_err_pct"] = err_pct(th4, e.c4);
                r["status"] = status;
                rows.push_back(std::move(r));
            }
        }
    }
    Json chf;
    if (c.validate_chf) {
        double worst = 0.0;
        std::size_t points = 0;
        for (double t : {1.0 / 365.0, 1.0 / 12.0, 1.0}) {
            for (int k = 0; k < 33; ++k) {
                const double u = -50.0 + 100.0 * k / 32.0;
                const double closed = transition_lch(u, t, p);
                const double oracle = transition_lch_oracle(u, t, p);
                const double dev = oracle != 0.0 ? std::fabs(closed - oracle) / std::fabs(oracle) : std::fabs(closed);
                worst = std::max(worst, dev);
                ++points;
            }
        }
        chf["points"] = points;
        chf["max_rel_dev"] = worst;
        chf["status"] = worst <= 1e-8 ? "PASS" : "FAIL";
    }
    std::ostringstream note;
    note << "validate: seed=" << c.seed << " max paths=" << max_n;
    res.notes.push_back(note.str());

    if (c.format == "csv") {
        std::ostringstream out;
        out << "scheme,dt,n_paths,c2,c2_se,c2_theory,c2_err_pct,c4,c4_se,c4_theory,c4_err_pct,status\n";
        for (const Json& r : rows) {
            out << r["scheme"].get<std::string>() << ',' << num(r["dt"].get<double>()) << ','
                << r["n_paths"].get<std::size_t>();
            for (const char* k : {"c2", "c2_se", "c2_theory", "c2_err_pct", "c4", "c4_se", "c4_theory", "c4_err_pct"}) {
                out << ',' << num(r[k].get<double>());
            }
            out << ',' << r["status"].get<std::string>() << '\n';
        }
        if (c.validate_chf) {
            out << "chf,,," << num(chf["max_rel_dev"].get<double>()) << ",,,,,,,," << chf["status"].get<std::string>()
                << '\n';
        }
        res.payload = out.str();
        return res;
    }
    Json j;
    j["seed"] = c.seed;
    j["params_digest"] = c.params_digest();
    j["cumulants"] = std::move(rows);
    if (c.validate_chf) j["chf"] = std::move(chf);
    res.payload = j.dump(2) + "\n";
    return res;
}

// ---------------------------------------------------------------- price

CommandResult cmd_price(const RunConfig& c) {
    require_model(c);
    if (c.contract.type == ContractType::none) throw ConfigError("contract.type: required for price");
    c.model.validate();
    CommandResult res;
    const ContractConfig& k = c.contract;
    const std::size_t mc_paths = k.mc_paths > 0 ? k.mc_paths : c.n_paths;
    const std::string name = contract_name(k.type);
    std::vector<Json> rows;
    Json doc;
    switch (k.type) {
        case ContractType::call_strip: {
            const StripResult fft = price_call_strip_fft(c.model, k.strip, k.fft);
            PriceEstimate est = fft.total;
            est.seed = c.seed;
            doc = record(c, name, est);
            rows.push_back(doc);
            Json fixings = Json::array();
            if (k.mc_check) {
                const StripResult mc = price_call_strip_mc(c.seed, c.model, k.strip, mc_paths, c.threads, c.scheme);
                Json m = record(c, name, mc.total);
                const double diff = std::fabs(mc.total.value - fft.total.value);
                m["abs_diff"] = diff;
                m["within_3se"] = diff <= 3.0 * mc.total.std_error;
                rows.push_back(m);
                doc["mc_check"] = std::move(m);
                for (std::size_t i = 0; i < fft.fixings.size(); ++i) {
                    fixings.push_back(Json{{"t", fft.fixings[i].t},
                                           {"fft", fft.fixings[i].value},
                                           {"mc", mc.fixings[i].value},
                                           {"mc_stderr", mc.fixings[i].std_error}});
                }
            } else {
                for (const FixingValue& f : fft.fixings) fixings.push_back(Json{{"t", f.t}, {"fft", f.value}});
            }
            doc["fixings"] = std::move(fixings);
            break;
        }
        case ContractType::asian: {
            const AsianResult a = price_asian_mc(c.seed, c.model, k.asian, mc_paths, c.threads);
            doc = record(c, name, a.call);
            doc["put"] = Json{{"value", a.put.value}, {"stderr", a.put.std_error}};
            doc["mean_average"] = a.mean_average;
            rows.push_back(record(c, name, a.call));
            rows.push_back(record(c, name + "_put", a.put));
            break;
        }
        case ContractType::swing: {
            const SwingResult s = price_swing_lsmc(c.seed, c.model, k.swing, mc_paths, c.threads);
            doc = record(c, name, s.value);
            doc["rights"] = k.swing.rights;
            doc["exercise_dates"] = k.swing.exercise_times.size();
            doc["warnings"] = s.warnings;
            rows.push_back(record(c, name, s.value));
            for (const auto& w : s.warnings) res.notes.push_back("warning: " + w);
            break;
        }
        case ContractType::none:
            break;
    }
    res.payload = c.format == "csv" ? csv_records(rows) : doc.dump(2) + "\n";
    return res;
}

// ---------------------------------------------------------------- calibrate

std::string calibration_json(const CalibrationResult& r, int indent) {
    Json j;
    j["model"]["ou"] = ou_json(r.ou);
    j["model"]["levy"] = levy_json(r.levy);
    j["model"]["curve"]["flat"] = r.last_price;
    j["model"]["rate"] = 0.0;
    Json d;
    d["seasonality_day_ahead"] = seasonality_json(r.seasonality);
    d["seasonality_month_ahead"] = seasonality_json(r.seasonality_ma);
    d["levy_method"] = r.levy_method;
    d["levy_log_likelihood"] = r.levy_log_likelihood;
    d["ou_log_likelihood"] = r.ou_log_likelihood;
    d["b_regression"] = r.b_regression;
    d["n_residuals"] = r.n_residuals;
    d["residual_lag1_acf"] = r.residual_lag1_acf;
    d["residual_skewness"] = r.residual_skewness;
    d["residual_skewness_se"] = r.residual_skewness_se;
    d["warnings"] = r.warnings;
    j["result"] = std::move(d);
    return j.dump(indent);
}

CommandResult cmd_calibrate(const RunConfig& c, bool synthetic) {
    CommandResult res;
    CalibrationResult fit;
    Json extra;
    if (synthetic) {
        const SyntheticMarketSpec truth;
        const SyntheticMarket mk = synthesize_market(c.seed, truth);
        fit = calibrate(mk.day_ahead, mk.month_ahead, c.calibration_alpha, c.seed);
        const RoundTripReport rt = check_round_trip(truth, fit);
        extra["truth"]["ou"] = ou_json(truth.ou);
        extra["truth"]["levy"] = levy_json(truth.levy);
        extra["errors"] = Json{{"b_rel", rt.b_rel},           {"sigma1_rel", rt.sigma1_rel}, {"nu1_rel", rt.nu1_rel},
                               {"sigma2_rel", rt.sigma2_rel}, {"nu2_rel", rt.nu2_rel},       {"theta2_abs", rt.theta2_abs}};
        extra["within_tolerance"] = Json{{"b", rt.b_ok},           {"sigma1", rt.sigma1_ok}, {"nu1", rt.nu1_ok},
                                         {"sigma2", rt.sigma2_ok}, {"nu2", rt.nu2_ok},       {"theta2", rt.theta2_ok},
                                         {"all", rt.all_ok()}};
        res.notes.push_back(std::string("calibrate: synthetic round trip ") + (rt.all_ok() ? "within" : "outside") +
                            " tolerances");
    } else {
        if (c.day_ahead_path.empty()) throw ConfigError("calibration stage 'inputs': calibration.day_ahead is required");
        if (c.month_ahead_path.empty()) {
            throw ConfigError("calibration stage 'inputs': calibration.month_ahead is required");
        }
        MarketSeries da, ma;
        try {
            da = load_market_csv(c.day_ahead_path);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("calibration stage 'load day-ahead': ") + e.what());
        }
        try {
            ma = load_market_csv(c.month_ahead_path);
        } catch (const ConfigError& e) {
            throw ConfigError(std::string("calibration stage 'load month-ahead': ") + e.what());
        }
        fit = calibrate(da, ma, c.calibration_alpha, c.seed);
    }
    for (const auto& w : fit.warnings) res.notes.push_back("warning: " + w);
    Json j = Json::parse(calibration_json(fit, -1));
    j["result"]["seed"] = c.seed;
    if (synthetic) j["result"]["synthetic"] = std::move(extra);
    if (c.format == "csv") {
        const KeyValues flat = flatten_json(j.dump());
        std::ostringstream out;
        out << "key,value\n";
        for (const auto& [key, value] : flat) {
            std::string v = value;
            if (v.find(',') != std::string::npos || v.find('"') != std::string::npos) {
                std::string q = "\"";
                for (char ch : v) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
                v = q + "\"";
            }
            out << key << ',' << v << '\n';
        }
        res.payload = out.str();
    } else {
        res.payload = j.dump(2) + "\n";
    }
    return res;
}

}  // namespace ounts
