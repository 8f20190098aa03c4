#pragma once

// Command-line front end: run, preset, list-presets.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "decontam/config.hpp"
#include "decontam/errors.hpp"
#include "decontam/network_topology.hpp"
#include "decontam/sim_harness.hpp"

namespace decontam {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline void write_results(const ExperimentConfig& config, const std::vector<ResultRow>& rows,
                          std::ostream& out) {
    const std::filesystem::path path = resolve_output_path(config);
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) {
        throw Error("cannot open output file '" + path.string() + "'");
    }
    write_csv(file, rows, config.master_seed);
    if (!file.flush()) {
        throw Error("failed writing '" + path.string() + "'");
    }
    out << "wrote " << rows.size() << " rows to " << path.string() << '\n';
}

} // namespace detail

inline int cli_main(int argc, const char* const* argv, std::ostream& out = std::cout,
                    std::ostream& err = std::cerr) {
    CLI::App app{"Pilot decontamination estimator simulator"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset_name;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::string output;
    int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--seed", seed, "Override master_seed");
        sub->add_option("--output", output, "CSV output path");
        sub->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);
    };

    CLI::App* run = app.add_subcommand("run", "Run an experiment from a YAML config file");
    run->add_option("--config", config_path, "Config file")->required();
    add_common(run);

    CLI::App* pre = app.add_subcommand("preset", "Run a named preset");
    pre->add_option("--name", preset_name, "Preset name")
        ->required()
        ->check(CLI::IsMember({"fig1", "fig2_3", "fig4_5"}));
    pre->add_option("--override", overrides, "key=value pairs");
    add_common(pre);

    CLI::App* list = app.add_subcommand("list-presets", "Print the preset names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (const CLI::App* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
            err << sub->help();
        } else {
            err << app.help();
        }
        return kExitUsage;
    }

    if (list->parsed()) {
        for (const auto name : kPresetNames) {
            out << name << '\n';
        }
        return kExitOk;
    }

    ExperimentConfig config;
    try {
        if (run->parsed()) {
            config = load_config(config_path);
        } else {
            config = preset_config(preset_name);
            for (const auto& o : overrides) {
                apply_override(config, o);
            }
        }
        if (seed) {
            config.master_seed = *seed;
        }
        if (!output.empty()) {
            config.output_path = output;
        }
        config.validate();
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        detail::write_results(config, run_experiment(config, workers), out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitOk;
}

} // namespace decontam
