#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ounts/commands.hpp"
#include "ounts/errors.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

const char* kConfigHelp = R"(Configuration keys (flat `key = value` file, or JSON with nested objects):
  model.alpha                 sets both factor alphas (default 0.5)
  model.ou.{alpha,b,sigma,nu,n0}
  model.levy.{alpha,sigma,nu,theta}   presence enables the two-factor model
  model.curve.flat | model.curve.path (CSV date,price; first date is t = 0)
  model.rate                  continuously compounded discount rate
  run.{seed,n_paths,scheme,threads}   scheme: exact | approx1 | approx2
  simulate.{dt,steps,output}  output: spot | factor
  validate.{paths,dts,schemes,chf}    comma-separated lists
  contract.type               call_strip | asian | swing
  contract.strike
  call_strip: contract.fixings | contract.first_day + contract.last_day
              contract.mc_check, contract.mc_paths, contract.fft.{damping,eta,tolerance,min_points,max_points}
  asian:      contract.fixings | contract.t_first + contract.t_last + contract.count
  swing:      contract.rights, contract.exercise | contract.maturity, contract.basis_degree
  calibration.{day_ahead,month_ahead,alpha}
  output.{path,format}        format: json | csv
Numbers accept fractions such as 1/365. Times are ACT/365 year fractions.
Exit codes: 0 success, 2 configuration error, 3 numerical failure.)";

struct Options {
    std::vector<std::string> configs;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> scheme;
    std::optional<std::string> out;
    std::optional<std::string> format;
    std::optional<unsigned> threads;
    bool synthetic = false;
};

ounts::RunConfig load(const Options& o) {
    ounts::KeyValues kv;
    // Later files override earlier ones, so a calibration output can be combined with a contract file.
    for (const auto& path : o.configs) {
        for (auto& [key, value] : ounts::load_config_file(path)) kv[key] = value;
    }
    if (o.seed) kv["run.seed"] = std::to_string(*o.seed);
    if (o.paths) kv["run.n_paths"] = std::to_string(*o.paths);
    if (o.scheme) kv["run.scheme"] = *o.scheme;
    if (o.out) kv["output.path"] = *o.out;
    if (o.format) kv["output.format"] = *o.format;
    if (o.threads) kv["run.threads"] = std::to_string(*o.threads);
    return ounts::build_config(kv);
}

void emit(const ounts::RunConfig& c, const ounts::CommandResult& r) {
    for (const auto& n : r.notes) std::cerr << n << '\n';
    if (c.output_path.empty()) {
        std::cout << r.payload;
        return;
    }
    std::ofstream f(c.output_path, std::ios::binary);
    if (!f) throw ounts::ConfigError("output.path: cannot write '" + c.output_path + "'");
    f << r.payload;
    if (!f) throw ounts::ConfigError("output.path: write to '" + c.output_path + "' failed");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation, validation, pricing and calibration for OU normal tempered stable spot models"};
    app.footer(kConfigHelp);
    app.require_subcommand(1);
    Options o;

    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.configs, "Configuration file (key = value or JSON); repeatable, later files win")
            ->take_all();
        sub->add_option("--seed", o.seed, "Random seed (overrides run.seed)");
        sub->add_option("--paths", o.paths, "Number of paths (overrides run.n_paths)");
        sub->add_option("--scheme", o.scheme, "exact | approx1 | approx2 (overrides run.scheme)");
        sub->add_option("--out", o.out, "Output file (overrides output.path; default stdout)");
        sub->add_option("--format", o.format, "json | csv (overrides output.format)");
        sub->add_option("--threads", o.threads, "Worker threads, 0 = all cores (overrides run.threads)");
    };
    CLI::App* sim = app.add_subcommand("simulate", "Write simulated spot or factor paths");
    CLI::App* val = app.add_subcommand("validate", "Cumulant suite and lch-vs-quadrature check");
    CLI::App* price = app.add_subcommand("price", "Price the configured contract");
    CLI::App* cal = app.add_subcommand("calibrate", "Fit the two-factor model to day-ahead and month-ahead data");
    for (CLI::App* s : {sim, val, price, cal}) add_common(s);
    cal->add_flag("--synthetic", o.synthetic, "Run the round trip on a simulated market instead of CSV inputs");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        const ounts::RunConfig c = load(o);
        ounts::CommandResult r;
        if (sim->parsed()) r = ounts::cmd_simulate(c);
        else if (val->parsed()) r = ounts::cmd_validate(c);
        else if (price->parsed()) r = ounts::cmd_price(c);
        else r = ounts::cmd_calibrate(c, o.synthetic);
        emit(c, r);
    } catch (const ounts::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ounts::DomainError& e) {
        std::cerr << "invalid parameters: " << e.what() << '\n';
        return kExitConfig;
    } catch (const ounts::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
