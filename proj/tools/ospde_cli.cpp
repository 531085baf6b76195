#include <chrono>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include "ospde/app.hpp"
#include "ospde/errors.hpp"
#include "ospde/io.hpp"
#include "ospde/parallel.hpp"

int main(int argc, char** argv) {
    CLI::App cli{"Penalized obstacle SPDE solver and verification harness"};
    cli.set_version_flag("--version", ospde::app::kVersion);
    cli.require_subcommand(1);

    std::string config;
    std::string out;
    std::size_t workers = 1;
    std::optional<std::uint64_t> seed_override;

    const std::pair<const char*, const char*> commands[] = {
        {"solve", "penalized solve at one level, fields and measure"},
        {"sweep", "penalization sweep with shared noise"},
        {"verify", "Monte Carlo identity checks"},
        {"lemmas", "deterministic and property-based lemma checks"},
        {"oracle", "comparison with the projected SOR solution"},
    };
    for (const auto& [name, help] : commands) {
        auto* sub = cli.add_subcommand(name, help);
        sub->add_option("--config,-c", config, "JSON run configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--out,-o", out, "output directory (overrides output.directory)");
        sub->add_option("--workers,-j", workers, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--seed-override", seed_override, "replace all seeds by K, K+1, K+2");
    }
    CLI11_PARSE(cli, argc, argv);

    if (const char* level = std::getenv("OSPDE_LOG")) {
        spdlog::set_level(spdlog::level::from_str(level));
    } else {
        spdlog::set_level(spdlog::level::warn);
    }

    const std::string command = cli.get_subcommands().front()->get_name();
    try {
        ospde::set_worker_count(workers);
        auto cfg = ospde::app::parse_run_config(ospde::app::load_json(config), seed_override);
        if (!out.empty()) cfg.out_dir = out;
        const auto start = std::chrono::steady_clock::now();
        const auto result = ospde::app::run_command(command, cfg);
        const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
        // Kept out of manifest.json so that reruns stay byte-identical.
        ospde::write_json_atomic(cfg.out_dir / "timing.json",
                                 {{"command", command}, {"workers", workers}, {"wall_seconds", wall.count()}});
        for (const auto& c : result.checks) {
            std::cout << (c.pass ? "pass " : "FAIL ") << c.name << " statistic=" << c.statistic
                      << " tolerance=" << c.tolerance << '\n';
        }
        for (const auto& f : result.failures()) std::cerr << "failed: " << f << '\n';
        std::cout << (result.pass() ? "ok" : "failed") << '\n';
        return result.exit_code();
    } catch (const ospde::HypothesisViolation& e) {
        std::cerr << "hypothesis violated (" << e.coefficient() << "): " << e.what() << '\n';
        return 3;
    } catch (const ospde::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 4;
    }
}
