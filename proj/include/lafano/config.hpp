#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "lafano/atom.hpp"
#include "lafano/lineshape.hpp"
#include "lafano/pulses.hpp"
#include "lafano/tdse.hpp"
#include "lafano/two_level.hpp"

namespace lafano {

/// Scenario kinds understood by the CLI.
enum class Scenario { eigen, tdse_scan, two_level_scan, lineshape, fit, reconstruct };

std::string to_string(Scenario s);
/// Throws ConfigError (field "scenario") for unknown names.
Scenario scenario_from_string(const std::string& s);

/// Fully resolved run configuration: every known field present, flat
/// names, lab units (eV, fs, W/cm^2; omega and dt in a.u.).
struct RunConfig {
    Scenario scenario = Scenario::eigen;
    nlohmann::json values = nlohmann::json::object();
    std::vector<std::string> defaulted;  // fields filled from defaults

    double number(const std::string& key) const;
    long integer(const std::string& key) const;
    bool flag(const std::string& key) const;
    std::string text(const std::string& key) const;
    std::vector<double> numbers(const std::string& key) const;
    bool is_null(const std::string& key) const;
};

/// Validates `user` and fills defaults. `scenario` wins over a "scenario"
/// key in the file; the two must agree if both are given. Throws
/// ConfigError naming the field and its accepted range.
RunConfig resolve_config(const nlohmann::json& user, const std::string& scenario = "");

/// Reads a JSON config file; parse errors become ConfigError.
nlohmann::json load_config_file(const std::string& path);

/// Names and one-line descriptions of every field, for --help and README.
struct FieldDoc {
    std::string name;
    std::string description;
    nlohmann::json default_value;
};
std::vector<FieldDoc> config_fields(Scenario s);

PulseTrain make_pulse_train(const RunConfig& c, double tau_fs = 0.0);
GridSpec make_grid_spec(const RunConfig& c);
PotentialParams make_potential(const RunConfig& c);
TdseScenario make_tdse_scenario(const RunConfig& c);
LevelParams make_level_params(const RunConfig& c);
TwoLevelOptions make_two_level_options(const RunConfig& c);
std::vector<double> energy_axis_eV(const RunConfig& c);
std::vector<double> delay_axis_fs(const RunConfig& c);

}  // namespace lafano
