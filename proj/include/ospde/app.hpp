#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ospde/problem.hpp"
#include "ospde/solver.hpp"

namespace ospde::app {

inline constexpr int kSchemaVersion = 1;
inline constexpr const char* kVersion = "1.0.0";

struct Seeds {
    std::uint64_t noise = 0;
    std::uint64_t paths = 0;
    std::uint64_t probes = 0;
};

/// Parsed and validated run configuration. `effective` is the config after
/// defaults and overrides; its hash identifies the run.
struct RunConfig {
    nlohmann::json effective;
    nlohmann::json problem;
    std::vector<double> schedule;
    double level = 0.0;
    Seeds seeds;
    std::size_t paths = 10000;
    std::size_t energy_paths = 100000;
    std::size_t probes = 1000;
    double monotonicity_tol = 1e-8;
    double oracle_distance_tol = 5e-3;
    double residual_allowance = 0.0;
    double energy_relative = 0.05;
    PsorOptions psor;
    SolverOptions solver;
    nlohmann::json verify;
    nlohmann::json lemmas;
    std::filesystem::path out_dir = "out";
    bool write_fields = true;
};

/// Throws ConfigError on schema violations (unknown keys included).
RunConfig parse_run_config(const nlohmann::json& doc, std::optional<std::uint64_t> seed_override = std::nullopt);

struct Check {
    std::string name;
    double statistic = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

struct CommandResult {
    std::string command;
    std::vector<Check> checks;
    nlohmann::json report;

    bool pass() const;
    int exit_code() const { return pass() ? 0 : 1; }
    std::vector<std::string> failures() const;
};

/// Runs one subcommand (solve, sweep, verify, lemmas, oracle) and writes its
/// artifacts plus manifest.json into cfg.out_dir.
CommandResult run_command(const std::string& command, const RunConfig& cfg);

/// Reads a JSON file; parse errors become ConfigError.
nlohmann::json load_json(const std::filesystem::path& path);

}  // namespace ospde::app
