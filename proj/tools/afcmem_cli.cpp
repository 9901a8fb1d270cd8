#include "afcmem/config.hpp"
#include "afcmem/errors.hpp"
#include "afcmem/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>

namespace {

enum ExitCode { ok = 0, usage = 1, config_error = 2, runtime_error = 3 };

afc::ExperimentConfig load(const std::string& path)
{
    return path.empty() ? afc::default_config() : afc::load_config(path);
}

int cmd_validate(const std::string& config_path)
{
    const auto config = load(config_path);
    const auto diags = afc::validate(config);
    for (const auto& d : diags)
        std::cerr << d.path << ": " << d.message << '\n';
    return diags.empty() ? ok : config_error;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed, const std::string& out,
            unsigned parallel)
{
    auto config = load(config_path);
    if (seed)
        config.seed = *seed;
    if (!out.empty())
        config.output_dir = out;
    const auto diags = afc::validate(config);
    if (!diags.empty()) {
        for (const auto& d : diags)
            std::cerr << d.path << ": " << d.message << '\n';
        return config_error;
    }
    const auto r = afc::run_experiment(config, config.output_dir, parallel);
    std::cout << "run directory: " << config.output_dir << '\n'
              << "storage efficiency: " << r.storage_efficiency() << '\n'
              << "singles:     SNR " << r.singles.snr.value << (r.singles.snr.lower_bound ? " (lower bound)" : "")
              << "  F_el " << r.singles.f_el.value << "  V " << r.singles.fit.visibility << "  F_bar "
              << r.singles.f_bar.value << " +/- " << r.singles.f_bar.sigma << '\n'
              << "conditional: SNR " << r.conditional.snr.value
              << (r.conditional.snr.lower_bound ? " (lower bound)" : "") << "  F_el " << r.conditional.f_el.value
              << "  V " << r.conditional.fit.visibility << "  F_bar " << r.conditional.f_bar.value << " +/- "
              << r.conditional.f_bar.sigma << '\n';
    return ok;
}

int cmd_sweep(const std::string& config_path, const std::string& param, const std::vector<double>& values,
              std::vector<std::uint64_t> seeds, const std::string& out, unsigned parallel, bool efficiency_only)
{
    const auto config = load(config_path);
    if (seeds.empty())
        seeds.push_back(config.seed);
    const auto rows = afc::sweep(config, param, values, seeds, parallel, efficiency_only);
    if (out.empty()) {
        afc::write_sweep(std::cout, param, rows);
    } else {
        std::ofstream f(out);
        if (!f)
            throw std::runtime_error("cannot write " + out);
        afc::write_sweep(f, param, rows);
    }
    return ok;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Atomic frequency comb quantum memory simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out;
    std::optional<std::uint64_t> seed;
    unsigned parallel = 1;

    auto* run = app.add_subcommand("run", "Run the full storage and projection protocol");
    run->add_option("--config", config_path, "Config file (JSON); defaults apply when omitted");
    run->add_option("--seed", seed, "Override the run seed");
    run->add_option("--out", out, "Output directory (overrides run.output_dir)");
    run->add_option("--parallel", parallel, "Independent data runs simulated concurrently")->check(CLI::PositiveNumber);

    auto* val = app.add_subcommand("validate", "Check a config; prints one line per violation");
    val->add_option("--config", config_path, "Config file (JSON)");

    std::string param;
    std::vector<double> values;
    std::vector<std::uint64_t> seeds;
    bool efficiency_only = false;
    auto* sw = app.add_subcommand("sweep", "Vary one numeric config field and tabulate the results");
    sw->add_option("--config", config_path, "Config file (JSON)");
    sw->add_option("--param", param, "Dotted field path, e.g. detectors.ingaas.dark_probability_per_gate")->required();
    sw->add_option("--values", values, "Comma separated values")->delimiter(',');
    sw->add_option("--seeds", seeds, "Comma separated seeds; medians are reported")->delimiter(',');
    sw->add_option("--out", out, "Write the table here instead of stdout");
    sw->add_option("--parallel", parallel, "Independent data runs simulated concurrently")->check(CLI::PositiveNumber);
    sw->add_flag("--efficiency-only", efficiency_only, "Skip the counting simulation");

    auto* defaults = app.add_subcommand("defaults", "Print the default config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : usage;
    }

    try {
        if (*defaults) {
            std::cout << afc::to_json(afc::default_config());
            return ok;
        }
        if (*val)
            return cmd_validate(config_path);
        if (*run)
            return cmd_run(config_path, seed, out, parallel);
        return cmd_sweep(config_path, param, values, seeds, out, parallel, efficiency_only);
    } catch (const afc::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const afc::ValidationError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return config_error;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return runtime_error;
    }
}
