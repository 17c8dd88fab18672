#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>

#include "lafano/config.hpp"

namespace lafano {

/// Process exit codes.
struct ExitCode {
    static constexpr int success = 0;
    static constexpr int config_error = 2;
    static constexpr int numerical_failure = 3;
};

struct CliRequest {
    std::string scenario;     // subcommand
    std::string config_path;  // empty: defaults only
    std::filesystem::path out_dir;
    int jobs = 1;
    std::uint64_t seed = 0;
};

/// Resolves the config, runs the scenario and writes its artifacts plus
/// config.json (resolved config), run.json (version, timings, status).
/// Nothing is written when the config is invalid. Log lines go to `log`.
/// Returns an ExitCode value.
int run_request(const CliRequest& request, std::ostream& log);

struct ScenarioReport {
    bool complete = true;  // false when a scan recorded per-delay failures
    nlohmann::json stages = nlohmann::json::array();  // {name, seconds}
    nlohmann::json summary = nlohmann::json::object();
};

/// Checks everything a run needs (config, input files) without writing.
/// Throws ConfigError or SchemaError.
void preflight(const RunConfig& config);

/// Runs an already resolved config into `out_dir` (created if missing).
/// Throws on failure.
ScenarioReport run_scenario(const RunConfig& config, const std::filesystem::path& out_dir, int jobs,
                            std::uint64_t seed, std::ostream& log);

std::string version_string();

}  // namespace lafano
