#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "ospde/app.hpp"
#include "ospde/errors.hpp"
#include "ospde/io.hpp"

using namespace ospde;
using nlohmann::json;

namespace {

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

json zero_config() { return app::load_json(std::filesystem::path(OSPDE_CONFIG_DIR) / "zero.json"); }

std::filesystem::path scratch(const char* name) {
    auto p = std::filesystem::temp_directory_path() / "ospde_unit" / name;
    std::filesystem::remove_all(p);
    return p;
}

}  // namespace

TEST_CASE("config schema") {
    CHECK_NOTHROW(app::parse_run_config(zero_config()));

    auto typo = zero_config();
    typo["tolerance"] = json::object();
    CHECK_THROWS_AS(app::parse_run_config(typo), ConfigError);

    auto nested = zero_config();
    nested["seeds"]["nois"] = 3;
    CHECK_THROWS_AS(app::parse_run_config(nested), ConfigError);

    auto unseeded = zero_config();
    unseeded["seeds"].erase("paths");
    CHECK_THROWS_AS(app::parse_run_config(unseeded), ConfigError);

    auto version = zero_config();
    version["schema_version"] = 2;
    CHECK_THROWS_AS(app::parse_run_config(version), ConfigError);

    auto schedule = zero_config();
    schedule["schedule"] = {1, 4, 4};
    CHECK_THROWS_AS(app::parse_run_config(schedule), ConfigError);

    const auto over = app::parse_run_config(zero_config(), 100);
    CHECK(over.seeds.noise == 100);
    CHECK(over.seeds.paths == 101);
    CHECK(over.seeds.probes == 102);

    auto moved = zero_config();
    moved["output"]["directory"] = "elsewhere";
    CHECK(config_hash(app::parse_run_config(moved).effective) ==
          config_hash(app::parse_run_config(zero_config()).effective));
    CHECK(config_hash(over.effective) != config_hash(app::parse_run_config(zero_config()).effective));
}

TEST_CASE("number format round-trips") {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 0.0}) {
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(0.1) == "0.1");
}

TEST_CASE("solve on the zero instance") {
    auto cfg = app::parse_run_config(zero_config());
    cfg.out_dir = scratch("zero");
    const auto res = app::run_command("solve", cfg);
    CHECK(res.pass());
    CHECK(res.exit_code() == 0);
    std::istringstream csv(slurp(cfg.out_dir / "u.csv"));
    std::string line;
    std::getline(csv, line);
    CHECK(line == "t,x,u");
    std::size_t rows = 0;
    while (std::getline(csv, line)) {
        CHECK(line.substr(line.rfind(',') + 1) == "0");
        ++rows;
    }
    CHECK(rows == 21 * 50);
    const auto manifest = app::load_json(cfg.out_dir / "manifest.json");
    CHECK(manifest["pass"] == true);
    CHECK(manifest["failures"].empty());
    CHECK(manifest["config_hash"] == config_hash(cfg.effective));

    const auto first = slurp(cfg.out_dir / "u.csv");
    const auto first_manifest = slurp(cfg.out_dir / "manifest.json");
    app::run_command("solve", cfg);
    CHECK(slurp(cfg.out_dir / "u.csv") == first);
    CHECK(slurp(cfg.out_dir / "manifest.json") == first_manifest);

    CHECK_THROWS_AS(app::run_command("plot", cfg), ConfigError);
}

TEST_CASE("failed checks give a nonzero exit and a failure list") {
    auto doc = zero_config();
    doc["problem"]["terminal"] = {{"family", "put"}, {"strike", 1}};
    doc["problem"]["obstacle"] = {{"family", "put"}, {"strike", 1}};
    doc["level"] = 1;
    doc["tolerances"] = {{"oracle_distance", 1e-14}};
    auto cfg = app::parse_run_config(doc);
    cfg.out_dir = scratch("tight");
    const auto res = app::run_command("solve", cfg);
    CHECK_FALSE(res.pass());
    CHECK(res.exit_code() != 0);
    REQUIRE(res.failures().size() == 1);
    CHECK(res.failures()[0] == "solve.oracle_sup_distance");
    const auto manifest = app::load_json(cfg.out_dir / "manifest.json");
    CHECK(manifest["failures"][0] == "solve.oracle_sup_distance");
}

TEST_CASE("unconstrained verify has zero Skorokhod statistics") {
    auto doc = zero_config();
    doc["problem"]["terminal"] = {{"family", "bump"}, {"amplitude", 1}, {"center", 0}, {"width", 0.3}};
    doc["verify"] = {{"residual", false}, {"skorokhod", true}};
    auto cfg = app::parse_run_config(doc);
    cfg.out_dir = scratch("unconstrained");
    const auto res = app::run_command("verify", cfg);
    CHECK(res.pass());
    for (const auto& row : res.report["skorokhod"]["rows"]) {
        CHECK(row["sup_negative_sq"] == 0.0);
        CHECK(row["reflection"] == 0.0);
    }
}
