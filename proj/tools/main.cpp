#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "csv.hpp"
#include "darklattice/analytics.hpp"
#include "darklattice/dynamics.hpp"
#include "darklattice/geometry.hpp"
#include "darklattice/hamiltonian.hpp"
#include "darklattice/linalg.hpp"
#include "darklattice/probe.hpp"

using namespace darklattice;

int main(int argc, char** argv)
{
    CLI::App app{"Collective emission, dark/bright Bell modes and state transfer between two atomic arrays"};
    app.set_version_flag("--version", std::string(cli::kVersion));
    app.require_subcommand(1, 1);

    std::string config_path, out, preset;
    std::vector<std::string> overrides;
    int jobs = 1;
    std::uint64_t seed = 0;

    for (const auto& name : cli::command_names()) {
        CLI::App* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "INI configuration file");
        sub->add_option("--set", overrides, "Override a key: section.key=value (repeatable)");
        sub->add_option("--out", out, "Main CSV output path (relative paths honour DARKLATTICE_OUT_DIR)");
        sub->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "Master seed for stochastic runs");
        sub->add_option("--preset", preset, "Named configuration from presets/");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? cli::kOk : cli::kUsage;
    }

    cli::RunOptions opts;
    opts.command = app.get_subcommands().front()->get_name();
    opts.jobs = jobs;
    opts.seed = seed;
    opts.out = out;

    try {
        if (config_path.empty() && preset.empty())
            throw cli::ConfigError("one of --config or --preset is required");
        if (!preset.empty())
            opts.config.merge(cli::Config::parse_file(cli::preset_path(preset)));
        if (!config_path.empty())
            opts.config.merge(cli::Config::parse_file(config_path));
        for (const auto& o : overrides)
            opts.config.apply_override(o);
        for (const auto& f : cli::run_command(opts))
            std::cout << f << '\n';
        return cli::kOk;
    } catch (const cli::ConfigError& e) {
        std::cerr << "darklattice: config error: " << e.what() << '\n';
        return cli::kConfig;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "darklattice: i/o error: " << e.what() << '\n';
        return cli::kIo;
    } catch (const GeometryError& e) {
        std::cerr << "darklattice: geometry error: " << e.what() << '\n';
        return cli::kNumerical;
    } catch (const HamiltonianError& e) {
        std::cerr << "darklattice: hamiltonian error: " << e.what() << '\n';
        return cli::kNumerical;
    } catch (const EigenError& e) {
        std::cerr << "darklattice: eigensolver error: " << e.what() << '\n';
        return cli::kNumerical;
    } catch (const dynamics::IntegrationError& e) {
        std::cerr << "darklattice: integration error: " << e.what() << '\n';
        return cli::kNumerical;
    } catch (const std::logic_error& e) {  // domain_error, invalid_argument
        std::cerr << "darklattice: invalid input: " << e.what() << '\n';
        return cli::kNumerical;
    } catch (const std::runtime_error& e) {
        std::cerr << "darklattice: " << e.what() << '\n';
        return cli::kIo;
    } catch (const std::exception& e) {
        std::cerr << "darklattice: internal error: " << e.what() << '\n';
        return cli::kInternal;
    }
}
