#include "ounts/config.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "ounts/errors.hpp"

namespace ounts {

namespace {

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

double parse_plain(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + text + "' is not a number");
    }
    if (used != t.size()) throw ConfigError(key + ": '" + text + "' is not a number");
    return v;
}

void flatten(const nlohmann::json& j, const std::string& prefix, KeyValues& out) {
    if (j.is_object()) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            flatten(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
        }
        return;
    }
    if (j.is_null()) return;
    std::string value;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            if (i > 0) value += ",";
            value += j[i].is_string() ? j[i].get<std::string>() : j[i].dump();
        }
    } else if (j.is_string()) {
        value = j.get<std::string>();
    } else {
        value = j.dump();
    }
    out[prefix] = value;
}

const std::set<std::string> kSections{"model", "run", "simulate", "validate", "contract", "calibration", "output"};

const std::set<std::string> kKnownKeys{
    "model.alpha",         "model.ou.alpha",          "model.ou.b",
    "model.ou.sigma",      "model.ou.nu",             "model.ou.n0",
    "model.levy.alpha",    "model.levy.sigma",        "model.levy.nu",
    "model.levy.theta",    "model.curve.flat",        "model.curve.path",
    "model.rate",          "run.seed",                "run.n_paths",
    "run.scheme",          "run.threads",             "simulate.dt",
    "simulate.steps",      "simulate.output",         "validate.paths",
    "validate.dts",        "validate.schemes",        "validate.chf",
    "contract.type",       "contract.strike",         "contract.fixings",
    "contract.first_day",  "contract.last_day",       "contract.t_first",
    "contract.t_last",     "contract.count",          "contract.maturity",
    "contract.rights",     "contract.exercise",       "contract.basis_degree",
    "contract.mc_check",   "contract.mc_paths",       "contract.fft.damping",
    "contract.fft.eta",    "contract.fft.tolerance",  "contract.fft.min_points",
    "contract.fft.max_points", "calibration.day_ahead", "calibration.month_ahead",
    "calibration.alpha",   "output.path",             "output.format",
};

class Reader {
public:
    explicit Reader(const KeyValues& kv) : kv_(kv) {}

    bool has(const std::string& key) const { return kv_.count(key) > 0; }
    const std::string& raw(const std::string& key) const { return kv_.at(key); }

    double number(const std::string& key) const {
        require(key);
        return parse_number(raw(key), key);
    }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    double positive(const std::string& key) const {
        const double v = number(key);
        if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(key + ": must be positive, got " + raw(key));
        return v;
    }

    long long integer(const std::string& key, long long lo, long long hi) const {
        const double v = number(key);
        if (v != std::floor(v) || v < static_cast<double>(lo) || v > static_cast<double>(hi)) {
            std::ostringstream msg;
            msg << key << ": must be an integer in [" << lo << ", " << hi << "], got " << raw(key);
            throw ConfigError(msg.str());
        }
        return static_cast<long long>(v);
    }
    long long integer(const std::string& key, long long lo, long long hi, long long fallback) const {
        return has(key) ? integer(key, lo, hi) : fallback;
    }

    std::uint64_t u64(const std::string& key) const {
        require(key);
        const std::string t = trim(raw(key));
        if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos) {
            throw ConfigError(key + ": must be a non-negative integer, got '" + raw(key) + "'");
        }
        try {
            return std::stoull(t);
        } catch (const std::exception&) {
            throw ConfigError(key + ": value out of range");
        }
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const std::string t = trim(raw(key));
        if (t == "true" || t == "1") return true;
        if (t == "false" || t == "0") return false;
        throw ConfigError(key + ": expected true or false, got '" + t + "'");
    }

    std::vector<double> list(const std::string& key) const {
        require(key);
        std::vector<double> out;
        std::stringstream ss(raw(key));
        std::string item;
        while (std::getline(ss, item, ',')) {
            if (trim(item).empty()) continue;
            out.push_back(parse_number(item, key));
        }
        if (out.empty()) throw ConfigError(key + ": empty list");
        return out;
    }

    std::string text(const std::string& key, const std::string& fallback = {}) const {
        return has(key) ? trim(raw(key)) : fallback;
    }

    void require(const std::string& key) const {
        if (!has(key)) throw ConfigError(key + ": required");
    }

private:
    const KeyValues& kv_;
};

template <class F>
auto with_prefix(const std::string& prefix, F&& body) -> decltype(body()) {
    try {
        return body();
    } catch (const ConfigError&) {
        throw;
    } catch (const DomainError& e) {
        throw ConfigError(prefix + ": " + e.what());
    }
}

void check_file(const std::string& key, const std::string& path) {
    if (!std::filesystem::exists(path)) throw ConfigError(key + ": file '" + path + "' does not exist");
}

Scheme scheme_value(const std::string& key, const std::string& text) {
    try {
        return parse_scheme(text);
    } catch (const std::exception&) {
        throw ConfigError(key + ": unknown scheme '" + text + "' (expected exact, approx1 or approx2)");
    }
}

}  // namespace

double parse_number(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    const auto slash = t.find('/');
    double v;
    if (slash == std::string::npos) {
        v = parse_plain(t, key);
    } else {
        const double num = parse_plain(t.substr(0, slash), key);
        const double den = parse_plain(t.substr(slash + 1), key);
        if (den == 0.0) throw ConfigError(key + ": division by zero in '" + text + "'");
        v = num / den;
    }
    if (!std::isfinite(v)) throw ConfigError(key + ": '" + text + "' is not finite");
    return v;
}

KeyValues parse_key_values(const std::string& text, const std::string& source) {
    KeyValues kv;
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(t.substr(0, eq));
        if (key.empty()) throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
        if (kv.count(key)) throw ConfigError(source + ":" + std::to_string(line_no) + ": duplicate key " + key);
        kv[key] = trim(t.substr(eq + 1));
    }
    return kv;
}

KeyValues flatten_json(const std::string& text, const std::string& source) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(source + ": invalid JSON: " + e.what());
    }
    if (!j.is_object()) throw ConfigError(source + ": top-level JSON value must be an object");
    KeyValues kv;
    flatten(j, "", kv);
    return kv;
}

KeyValues load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') return flatten_json(text, path);
    return parse_key_values(text, path);
}

std::string RunConfig::params_digest() const {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
    };
    for (const auto& [k, v] : source) {
        if (k.rfind("model.", 0) != 0) continue;
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    char out[17];
    std::snprintf(out, sizeof out, "%016llx", static_cast<unsigned long long>(h));
    return out;
}

RunConfig build_config(const KeyValues& kv) {
    for (const auto& [key, value] : kv) {
        const std::string section = key.substr(0, key.find('.'));
        if (kSections.count(section) && !kKnownKeys.count(key)) throw ConfigError(key + ": unknown key");
    }
    const Reader r(kv);
    RunConfig c;
    c.source = kv;

    // model
    const bool any_model = std::any_of(kv.begin(), kv.end(), [](const auto& p) { return p.first.rfind("model.", 0) == 0; });
    if (any_model) {
        c.model_given = true;
        const double alpha_all = r.number("model.alpha", 0.5);
        const double ou_alpha = r.number("model.ou.alpha", alpha_all);
        const OuNtsParams ou = with_prefix("model.ou", [&] {
            return make_ou_nts(ou_alpha, r.positive("model.ou.b"), r.number("model.ou.sigma"), r.positive("model.ou.nu"),
                               r.number("model.ou.n0", 0.0));
        });
        ForwardCurve curve = ForwardCurve::flat(1.0);
        if (r.has("model.curve.flat") && r.has("model.curve.path")) {
            throw ConfigError("model.curve: set either flat or path, not both");
        }
        if (r.has("model.curve.flat")) curve = ForwardCurve::flat(r.positive("model.curve.flat"));
        if (r.has("model.curve.path")) {
            const std::string path = r.text("model.curve.path");
            check_file("model.curve.path", path);
            curve = ForwardCurve::load_csv(path);
        }
        const double rate = r.number("model.rate", 0.0);
        const bool levy = std::any_of(kv.begin(), kv.end(), [](const auto& p) { return p.first.rfind("model.levy.", 0) == 0; });
        if (levy) {
            const double levy_alpha = r.number("model.levy.alpha", alpha_all);
            const NtsParams lp = with_prefix("model.levy", [&] {
                return make_nts(levy_alpha, r.number("model.levy.sigma"), r.positive("model.levy.nu"),
                                r.number("model.levy.theta", 0.0));
            });
            c.model = SpotModel::two_factor(std::move(curve), ou, lp, rate);
        } else {
            c.model = SpotModel::one_factor(std::move(curve), ou, rate);
        }
    }

    // run
    if (r.has("run.seed")) c.seed = r.u64("run.seed");
    c.n_paths = static_cast<std::size_t>(r.integer("run.n_paths", 1, 100000000, static_cast<long long>(c.n_paths)));
    if (r.has("run.scheme")) c.scheme = scheme_value("run.scheme", r.text("run.scheme"));
    c.threads = static_cast<unsigned>(r.integer("run.threads", 0, 1024, 0));

    // simulate
    if (r.has("simulate.dt")) c.sim_dt = r.positive("simulate.dt");
    c.sim_steps = static_cast<std::size_t>(r.integer("simulate.steps", 1, 10000000, static_cast<long long>(c.sim_steps)));
    const std::string sim_out = r.text("simulate.output", "spot");
    if (sim_out != "spot" && sim_out != "factor") throw ConfigError("simulate.output: expected spot or factor");
    c.sim_factor = sim_out == "factor";

    // validate
    if (r.has("validate.paths")) {
        c.validate_paths.clear();
        for (double v : r.list("validate.paths")) {
            if (v < 10.0 || v != std::floor(v)) throw ConfigError("validate.paths: entries must be integers >= 10");
            c.validate_paths.push_back(static_cast<std::size_t>(v));
        }
        std::sort(c.validate_paths.begin(), c.validate_paths.end());
    }
    if (r.has("validate.dts")) {
        c.validate_dts = r.list("validate.dts");
        for (double v : c.validate_dts) {
            if (!(v > 0.0)) throw ConfigError("validate.dts: entries must be positive");
        }
    }
    if (r.has("validate.schemes")) {
        c.validate_schemes.clear();
        std::stringstream ss(r.raw("validate.schemes"));
        std::string item;
        while (std::getline(ss, item, ',')) c.validate_schemes.push_back(scheme_value("validate.schemes", trim(item)));
        if (c.validate_schemes.empty()) throw ConfigError("validate.schemes: empty list");
    }
    c.validate_chf = r.boolean("validate.chf", true);

    // contract
    const std::string type = r.text("contract.type");
    if (!type.empty()) {
        ContractConfig& k = c.contract;
        const double strike = r.positive("contract.strike");
        if (type == "call_strip") {
            k.type = ContractType::call_strip;
            if (r.has("contract.fixings")) {
                k.strip.fixing_times = r.list("contract.fixings");
                k.strip.strike = strike;
            } else {
                const auto first = r.integer("contract.first_day", 1, 100000);
                const auto last = r.integer("contract.last_day", first, 100000);
                k.strip = CallStripSpec::daily(static_cast<int>(first), static_cast<int>(last), strike);
            }
            with_prefix("contract", [&] {
                k.strip.validate();
                return 0;
            });
        } else if (type == "asian") {
            k.type = ContractType::asian;
            if (r.has("contract.fixings")) {
                k.asian.fixing_times = r.list("contract.fixings");
                k.asian.strike = strike;
            } else {
                k.asian = AsianSpec::evenly_spaced(r.positive("contract.t_first"), r.positive("contract.t_last"),
                                                   static_cast<int>(r.integer("contract.count", 1, 100000)), strike);
            }
            k.asian.validate();
        } else if (type == "swing") {
            k.type = ContractType::swing;
            const int rights = static_cast<int>(r.integer("contract.rights", 1, 100000));
            if (r.has("contract.exercise")) {
                k.swing.exercise_times = r.list("contract.exercise");
                k.swing.rights = rights;
                k.swing.strike = strike;
            } else {
                k.swing = SwingSpec::final_year_daily(r.positive("contract.maturity"), rights, strike);
            }
            k.swing.basis_degree = static_cast<int>(r.integer("contract.basis_degree", 0, 6, 3));
            k.swing.validate();
        } else {
            throw ConfigError("contract.type: expected call_strip, asian or swing, got '" + type + "'");
        }
        k.mc_check = r.boolean("contract.mc_check", true);
        k.mc_paths = static_cast<std::size_t>(r.integer("contract.mc_paths", 2, 100000000, 0));
        if (r.has("contract.fft.damping")) k.fft.damping = r.positive("contract.fft.damping");
        if (r.has("contract.fft.eta")) k.fft.eta = r.positive("contract.fft.eta");
        if (r.has("contract.fft.tolerance")) k.fft.tolerance = r.positive("contract.fft.tolerance");
        auto pow2 = [&](const char* key, std::size_t fallback) {
            const auto v = static_cast<std::size_t>(r.integer(key, 16, 1 << 24, static_cast<long long>(fallback)));
            if ((v & (v - 1)) != 0) throw ConfigError(std::string(key) + ": must be a power of two");
            return v;
        };
        k.fft.min_points = pow2("contract.fft.min_points", k.fft.min_points);
        k.fft.max_points = pow2("contract.fft.max_points", std::max(k.fft.max_points, k.fft.min_points));
        if (k.fft.max_points < k.fft.min_points) throw ConfigError("contract.fft.max_points: below min_points");
    } else {
        for (const auto& [key, value] : kv) {
            if (key.rfind("contract.", 0) == 0) throw ConfigError("contract.type: required when contract keys are set");
        }
    }

    // calibration
    c.day_ahead_path = r.text("calibration.day_ahead");
    c.month_ahead_path = r.text("calibration.month_ahead");
    // Input files belong to the first pipeline stage, so their errors carry its name.
    if (!c.day_ahead_path.empty()) check_file("calibration stage 'inputs': calibration.day_ahead", c.day_ahead_path);
    if (!c.month_ahead_path.empty()) {
        check_file("calibration stage 'inputs': calibration.month_ahead", c.month_ahead_path);
    }
    c.calibration_alpha = r.number("calibration.alpha", 0.5);
    if (!(c.calibration_alpha > 0.0 && c.calibration_alpha < 1.0)) {
        throw ConfigError("calibration.alpha: must lie in (0, 1)");
    }

    // output
    c.output_path = r.text("output.path");
    c.format = r.text("output.format", "json");
    if (c.format != "json" && c.format != "csv") throw ConfigError("output.format: expected json or csv");
    c.contract.fft.threads = c.threads;
    return c;
}

}  // namespace ounts
