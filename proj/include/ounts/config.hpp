#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ounts/market.hpp"
#include "ounts/pricing.hpp"

namespace ounts {

// Flat dotted keys, e.g. "model.ou.b" -> "5".
using KeyValues = std::map<std::string, std::string>;

// `key = value` lines; blank lines and lines starting with '#' are skipped.
KeyValues parse_key_values(const std::string& text, const std::string& source = "config");
// Nested JSON objects become dotted keys; arrays become comma-separated lists.
KeyValues flatten_json(const std::string& text, const std::string& source = "config");
// Chooses the parser from the first non-blank character ('{' means JSON).
KeyValues load_config_file(const std::string& path);

// Accepts decimals and simple fractions such as "1/365".
double parse_number(const std::string& text, const std::string& key);

enum class ContractType { none, call_strip, asian, swing };

struct ContractConfig {
    ContractType type = ContractType::none;
    CallStripSpec strip;
    AsianSpec asian;
    SwingSpec swing;
    bool mc_check = true;
    std::size_t mc_paths = 0;  // 0 means run.n_paths
    FftSettings fft;
};

struct RunConfig {
    SpotModel model;
    bool model_given = false;

    std::uint64_t seed = 1;
    std::size_t n_paths = 10000;
    Scheme scheme = Scheme::exact;
    unsigned threads = 0;

    double sim_dt = 1.0 / 365.0;
    std::size_t sim_steps = 365;
    bool sim_factor = false;  // write N(t) instead of S(t)

    std::vector<std::size_t> validate_paths{1000, 10000, 100000, 1000000};
    std::vector<double> validate_dts{1.0 / 365.0, 1.0 / 12.0};
    std::vector<Scheme> validate_schemes{Scheme::exact, Scheme::approx1, Scheme::approx2};
    bool validate_chf = true;

    ContractConfig contract;

    std::string day_ahead_path;
    std::string month_ahead_path;
    double calibration_alpha = 0.5;

    std::string output_path;  // empty means stdout
    std::string format = "json";

    KeyValues source;  // keys the config was built from

    // FNV-1a over the sorted model.* keys and values.
    std::string params_digest() const;
};

// Validates every field; errors are ConfigError naming the offending key.
RunConfig build_config(const KeyValues& kv);

}  // namespace ounts
