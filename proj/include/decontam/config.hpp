#pragma once

// Experiment configuration: YAML files, named presets and key=value overrides.
//
// File layout (keys mirror ExperimentConfig):
//
//   scenario: fig2_3            # preset name, or a mapping:
//   # scenario:
//   #   preset: fig2_3          # optional base
//   #   angular_spread_deg: 20
//   M_grid: [10, 20, 50, 100]
//   estimators: [ls, mmse, am, ca, ma]
//   trials: 100
//   master_seed: 7
//   covariance_mode: analytic   # or empirical, empirical(1000)
//   output_path: out/fig2_3.csv

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "decontam/errors.hpp"
#include "decontam/estimators.hpp"
#include "decontam/network_topology.hpp"
#include "decontam/sim_harness.hpp"

namespace decontam {

inline constexpr const char* kOutputDirEnv = "DECONTAM_OUTPUT_DIR";

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

template <class T>
T parse_number(std::string_view key, std::string_view text) {
    text = trim(text);
    T value{};
    const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (text.empty() || ec != std::errc() || end != text.data() + text.size()) {
        throw ConfigError("'" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
    }
    return value;
}

/// "a,b,c" or "[a, b, c]" -> {"a","b","c"}.
inline std::vector<std::string> split_list(std::string_view text) {
    text = trim(text);
    if (text.size() >= 2 && text.front() == '[' && text.back() == ']') {
        text = trim(text.substr(1, text.size() - 2));
    }
    std::vector<std::string> out;
    while (!text.empty()) {
        const auto comma = text.find(',');
        out.emplace_back(trim(text.substr(0, comma)));
        if (comma == std::string_view::npos) {
            break;
        }
        text = text.substr(comma + 1);
    }
    return out;
}

inline Placement parse_placement(std::string_view text) {
    if (text == "uniform") {
        return Placement::uniform;
    }
    if (text == "symmetric") {
        return Placement::symmetric;
    }
    throw ConfigError("'placement': expected uniform or symmetric, got '" + std::string(text) + "'");
}

} // namespace detail

/// Sets one scenario field by name.
inline void set_scenario_field(ScenarioParams& p, std::string_view key, std::string_view value) {
    using detail::parse_number;
    if (key == "preset") {
        p = preset_params(detail::trim(value));
    } else if (key == "name") {
        p.name = std::string(detail::trim(value));
    } else if (key == "num_cells") {
        p.num_cells = parse_number<int>(key, value);
    } else if (key == "users_per_cell") {
        p.users_per_cell = parse_number<int>(key, value);
    } else if (key == "cell_radius") {
        p.cell_radius = parse_number<double>(key, value);
    } else if (key == "exclusion_radius") {
        p.exclusion_radius = parse_number<double>(key, value);
    } else if (key == "path_loss_exponent") {
        p.path_loss_exponent = parse_number<double>(key, value);
    } else if (key == "path_loss_constant") {
        p.path_loss_constant = parse_number<double>(key, value);
    } else if (key == "angular_spread_deg") {
        p.angular_spread_deg = parse_number<double>(key, value);
    } else if (key == "num_paths") {
        p.num_paths = parse_number<int>(key, value);
    } else if (key == "spacing_ratio") {
        p.spacing_ratio = parse_number<double>(key, value);
    } else if (key == "snr_edge_db") {
        p.snr_edge_db = parse_number<double>(key, value);
    } else if (key == "pilot_length") {
        p.pilot_length = parse_number<int>(key, value);
    } else if (key == "data_length") {
        p.data_length = parse_number<int>(key, value);
    } else if (key == "placement") {
        p.placement = detail::parse_placement(detail::trim(value));
    } else {
        throw ConfigError("unknown scenario key '" + std::string(key) + "'");
    }
}

/// "analytic", "empirical", "empirical(500)" or "empirical(N=500)".
inline void set_covariance_mode(ExperimentConfig& c, std::string_view text) {
    text = detail::trim(text);
    if (text == "analytic") {
        c.covariance_mode = CovarianceMode::analytic;
        return;
    }
    if (text.starts_with("empirical")) {
        c.covariance_mode = CovarianceMode::empirical;
        c.covariance_samples = 1000;
        std::string_view rest = detail::trim(text.substr(9));
        if (rest.empty()) {
            return;
        }
        if (rest.front() == '(' && rest.back() == ')') {
            rest = detail::trim(rest.substr(1, rest.size() - 2));
            if (rest.starts_with("N=")) {
                rest = rest.substr(2);
            }
            c.covariance_samples = detail::parse_number<std::size_t>("covariance_mode", rest);
            return;
        }
    }
    throw ConfigError("'covariance_mode': expected analytic or empirical(N), got '" +
                      std::string(text) + "'");
}

/// Sets one top-level field by name; `scenario.<field>` reaches into the scenario.
inline void set_config_field(ExperimentConfig& c, std::string_view key, std::string_view value) {
    if (key.starts_with("scenario.")) {
        set_scenario_field(c.scenario, key.substr(9), value);
    } else if (key == "scenario") {
        c.scenario = preset_params(detail::trim(value));
    } else if (key == "M_grid") {
        c.antenna_grid.clear();
        for (const auto& item : detail::split_list(value)) {
            c.antenna_grid.push_back(detail::parse_number<int>(key, item));
        }
    } else if (key == "estimators") {
        c.estimators.clear();
        for (const auto& item : detail::split_list(value)) {
            c.estimators.push_back(parse_estimator(item));
        }
    } else if (key == "trials") {
        c.trials = detail::parse_number<int>(key, value);
    } else if (key == "master_seed") {
        c.master_seed = detail::parse_number<std::uint64_t>(key, value);
    } else if (key == "covariance_mode") {
        set_covariance_mode(c, value);
    } else if (key == "output_path") {
        c.output_path = std::string(detail::trim(value));
    } else {
        throw ConfigError("unknown key '" + std::string(key) + "'");
    }
}

/// Applies a "key=value" override.
inline void apply_override(ExperimentConfig& c, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    set_config_field(c, detail::trim(assignment.substr(0, eq)), assignment.substr(eq + 1));
}

/// Default experiment for a named preset.
inline ExperimentConfig preset_config(std::string_view name) {
    ExperimentConfig c;
    c.scenario = preset_params(name);
    c.antenna_grid = {10, 20, 50, 100};
    c.estimators = {EstimatorKind::ls, EstimatorKind::mmse, EstimatorKind::am, EstimatorKind::ca};
    if (c.scenario.users_per_cell == 1) {
        c.estimators.push_back(EstimatorKind::sa);
    }
    c.estimators.push_back(EstimatorKind::ma);
    return c;
}

namespace detail {

inline ConfigError located(const std::string& source, const YAML::Mark& mark, const std::string& what) {
    return ConfigError(source + ":" + std::to_string(mark.line + 1) + ":" +
                       std::to_string(mark.column + 1) + ": " + what);
}

/// Scalar text of a node; sequences of scalars become comma lists.
inline std::string scalar_text(const YAML::Node& node, const std::string& key,
                               const std::string& source) {
    if (node.IsScalar()) {
        return node.Scalar();
    }
    if (node.IsSequence()) {
        std::string out;
        for (const auto& item : node) {
            if (!item.IsScalar()) {
                throw located(source, item.Mark(), "'" + key + "': expected a list of scalars");
            }
            out += (out.empty() ? "" : ",") + item.Scalar();
        }
        return out;
    }
    throw located(source, node.Mark(), "'" + key + "': expected a scalar or a list");
}

} // namespace detail

/// Parses YAML text; `source` names the input in error messages.
inline ExperimentConfig parse_config(const std::string& text, const std::string& source = "<config>") {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw detail::located(source, e.mark, e.msg);
    }
    if (!root.IsMap()) {
        throw detail::located(source, root.Mark(), "top level must be a mapping");
    }
    if (!root["scenario"]) {
        throw ConfigError(source + ": missing required key 'scenario'");
    }
    ExperimentConfig c;
    const YAML::Node scenario = root["scenario"];
    if (scenario.IsMap()) {
        ScenarioParams p;
        if (const YAML::Node base = scenario["preset"]) {
            p = preset_params(detail::scalar_text(base, "preset", source));
        }
        for (const auto& kv : scenario) {
            const std::string key = kv.first.as<std::string>();
            if (key == "preset") {
                continue;
            }
            const std::string value = detail::scalar_text(kv.second, key, source);
            try {
                set_scenario_field(p, key, value);
            } catch (const ConfigError& e) {
                throw detail::located(source, kv.first.Mark(), e.what());
            }
        }
        c.scenario = p;
    }
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        if (key == "scenario" && scenario.IsMap()) {
            continue;
        }
        const std::string value = detail::scalar_text(kv.second, key, source);
        try {
            set_config_field(c, key, value);
        } catch (const ConfigError& e) {
            throw detail::located(source, kv.first.Mark(), e.what());
        }
    }
    try {
        c.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(source + ": " + e.what());
    }
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file '" + path.string() + "'");
    }
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str(), path.string());
}

/// output_path if set, else <$DECONTAM_OUTPUT_DIR or .>/<scenario name>.csv.
inline std::filesystem::path resolve_output_path(const ExperimentConfig& c) {
    if (!c.output_path.empty()) {
        return c.output_path;
    }
    const char* dir = std::getenv(kOutputDirEnv);
    const std::filesystem::path base = dir && *dir ? dir : ".";
    return base / (c.scenario.name + ".csv");
}

} // namespace decontam
