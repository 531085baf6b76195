// Desk-scale acceptance run: one line per criterion, exit 0 iff all pass.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>

#include "ospde/app.hpp"
#include "ospde/parallel.hpp"
#include "ospde/problem.hpp"

namespace fs = std::filesystem;
using namespace ospde;
using nlohmann::json;

namespace {

fs::path g_out;
std::map<std::string, fs::path> g_runs;  // config name -> output dir of its workers=1 run

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Run {
    app::CommandResult result;
    double seconds = 0.0;
};

Run run(const std::string& command, const std::string& name, std::size_t workers, const std::string& tag) {
    set_worker_count(workers);
    auto cfg = app::parse_run_config(app::load_json(fs::path(OSPDE_CONFIG_DIR) / (name + ".json")));
    cfg.out_dir = g_out / (name + "." + tag);
    fs::remove_all(cfg.out_dir);
    const auto start = std::chrono::steady_clock::now();
    Run r{app::run_command(command, cfg), 0.0};
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    set_worker_count(1);
    if (tag == "w1") g_runs[name] = cfg.out_dir;
    return r;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

const app::Check* find(const app::CommandResult& r, const std::string& name) {
    for (const auto& c : r.checks) {
        if (c.name == name) return &c;
    }
    return nullptr;
}

bool all_with_prefix(const app::CommandResult& r, const std::string& prefix, std::size_t* count = nullptr) {
    std::size_t n = 0;
    bool ok = true;
    for (const auto& c : r.checks) {
        if (c.name.rfind(prefix, 0) == 0) {
            ++n;
            ok = ok && c.pass;
        }
    }
    if (count) *count = n;
    return ok && n > 0;
}

std::string failures(const app::CommandResult& r) {
    std::string s;
    for (const auto& f : r.failures()) s += " " + f;
    return s.empty() ? "" : "; failed:" + s;
}

Outcome hypothesis_gate() {
    const auto grid = SpaceTimeGrid({{-2, 2, 21}}, 10, 0.25);
    auto block = [](double alpha) {
        return json{{"f", {{"family", "sine"}, {"y_coeff", 0.5}, {"z_coeff", 0.5}}},
                    {"g", {{"family", "linear_gradient"}, {"alpha", alpha}}},
                    {"h", {{"family", "sine"}, {"offset", 0.3}, {"y_coeff", 0.5}, {"z_coeff", 0.5}}},
                    {"lipschitz", {{"C", 0.5}, {"alpha", alpha}, {"beta", 0.5}}}};
    };
    const auto ok = validate_hypotheses(make_coefficients(block(0.2), 1), grid, 1000, 1);
    const auto bad = validate_hypotheses(make_coefficients(block(0.4), 1), grid, 1000, 1);
    return {ok.pass() && !bad.pass() && !bad.contraction_pass,
            "margin(0.2, 0.5) = " + fmt(ok.contraction_margin) + ", margin(0.4, 0.5) = " + fmt(bad.contraction_margin)};
}

Outcome psor_equivalence() {
    const auto r = run("oracle", "put_oracle", 1, "w1");
    std::string table;
    for (const auto& row : r.result.report["oracle"]["rows"]) table += " " + fmt(row["sup_distance"].get<double>());
    return {r.result.pass() && r.seconds < 30.0, "sup distances" + table + ", " + fmt(r.seconds) + " s" + failures(r.result)};
}

Outcome monotonicity() {
    const auto det = run("sweep", "put_sweep", 1, "w1");
    const auto sto = run("sweep", "stochastic_sweep", 1, "w1");
    const auto* d = find(det.result, "sweep.monotonicity_defect");
    const auto* s = find(sto.result, "sweep.monotonicity_defect");
    return {det.result.pass() && sto.result.pass(),
            "defect deterministic " + fmt(d ? d->statistic : -1) + " (tol 1e-8), stochastic " +
                fmt(s ? s->statistic : -1) + " (tol 1e-6)" + failures(det.result) + failures(sto.result)};
}

Outcome skorokhod() {
    const auto r = run("verify", "skorokhod", 1, "w1");
    const auto& sk = r.result.report["skorokhod"];
    return {r.result.pass() && r.seconds < 60.0,
            std::to_string(sk["paths"].get<std::size_t>()) + " paths, " + std::to_string(sk["truncated"].get<std::size_t>()) +
                " truncated, " + fmt(r.seconds) + " s" + failures(r.result)};
}

Outcome residual() {
    const auto lin = run("verify", "linear_residual", 1, "w1");
    const auto qua = run("verify", "quasilinear_residual", 1, "w1");
    std::size_t nl = 0, nq = 0;
    const bool ok = all_with_prefix(lin.result, "verify.residual.", &nl) &&
                    all_with_prefix(qua.result, "verify.residual.", &nq) && lin.result.pass() && qua.result.pass();
    return {ok, std::to_string(nl) + " linear and " + std::to_string(nq) + " quasilinear slices, excluded fraction " +
                    fmt(qua.result.report["residual"]["excluded_fraction"].get<double>()) + failures(lin.result) +
                    failures(qua.result)};
}

Outcome energy() {
    const auto r = run("verify", "energy", 1, "w1");
    std::string rel;
    for (const auto& row : r.result.report["energy"]["energy"]) rel += " " + fmt(row["relative_error"].get<double>());
    std::size_t nm = 0;
    const bool ok = r.result.pass() && all_with_prefix(r.result, "verify.energy.") &&
                    all_with_prefix(r.result, "verify.measure.", &nm) && nm == 3;
    return {ok, "relative errors" + rel + ", " + std::to_string(nm) + " test functions" + failures(r.result)};
}

app::CommandResult g_lemmas;

Outcome gradient_decay() {
    g_lemmas = run("lemmas", "lemmas", 1, "w1").result;
    std::size_t n = 0;
    const bool ok = all_with_prefix(g_lemmas, "lemmas.gradient_decay.", &n) && n == 3;
    const auto* f0 = find(g_lemmas, "lemmas.gradient_decay.f0.spread");
    const auto* f1 = find(g_lemmas, "lemmas.gradient_decay.f1.spread");
    return {ok, "spread f=1 " + fmt(f0 ? f0->statistic : -1) + ", bump " + fmt(f1 ? f1->statistic : -1) +
                    ", div variant decreasing " + std::string(ok ? "yes" : "no")};
}

Outcome smoothing() {
    const bool ok = all_with_prefix(g_lemmas, "lemmas.smoothing.");
    const auto& s = g_lemmas.report["smoothing"];
    return {ok && s["paths"].get<std::size_t>() == 10000,
            std::to_string(s["paths"].get<std::size_t>()) + " paths at delta " + fmt(s["delta"].get<double>())};
}

Outcome calculus() {
    const auto& c = g_lemmas.report["calculus"];
    const bool ok = all_with_prefix(g_lemmas, "lemmas.calculus.") && c["tested"].get<std::size_t>() == 10000;
    return {ok, std::to_string(c["violations"].get<std::size_t>()) + " violations in " +
                    std::to_string(c["tested"].get<std::size_t>()) + ", min margins " +
                    fmt(c["min_margin_first"].get<double>()) + " / " + fmt(c["min_margin_second"].get<double>())};
}

Outcome mazur() {
    const auto* r = find(g_lemmas, "lemmas.mazur.distance_ratio");
    const auto* s = find(g_lemmas, "lemmas.mazur.simplex_error");
    return {all_with_prefix(g_lemmas, "lemmas.mazur."),
            "distance ratio " + fmt(r ? r->statistic : -1) + ", simplex error " + fmt(s ? s->statistic : -1)};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
    std::size_t files = 0;
    for (const auto& e : fs::directory_iterator(a)) {
        const auto name = e.path().filename();
        if (!fs::exists(b / name)) {
            why = "missing " + name.string();
            return false;
        }
        if (slurp(e.path()) != slurp(b / name)) {
            why = "differs " + name.string();
            return false;
        }
        ++files;
    }
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(b)) --files;
    if (files != 0) {
        why = "file sets differ";
        return false;
    }
    return true;
}

Outcome determinism() {
    const std::map<std::string, std::string> commands = {
        {"put_oracle", "oracle"},       {"put_sweep", "sweep"},        {"stochastic_sweep", "sweep"},
        {"skorokhod", "verify"},        {"linear_residual", "verify"}, {"quasilinear_residual", "verify"},
        {"energy", "verify"},           {"lemmas", "lemmas"},          {"put_solve", "solve"},
        {"zero", "solve"}};
    std::size_t compared = 0;
    for (const auto& [name, cmd] : commands) {
        if (!g_runs.count(name)) run(cmd, name, 1, "w1");
        run(cmd, name, 4, "w4");
        std::string why;
        if (!same_tree(g_runs[name], g_out / (name + ".w4"), why)) return {false, name + " workers 1 vs 4: " + why};
        ++compared;
    }
    run("solve", "put_solve", 1, "again");
    std::string why;
    if (!same_tree(g_runs["put_solve"], g_out / "put_solve.again", why)) return {false, "rerun: " + why};
    return {true, std::to_string(compared) + " configs byte-identical across workers 1 and 4, rerun identical"};
}

}  // namespace

int main(int argc, char** argv) {
    g_out = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "ospde_acceptance";
    fs::create_directories(g_out);
    const std::pair<const char*, std::function<Outcome()>> criteria[] = {
        {"hypothesis gate", hypothesis_gate},
        {"PSOR oracle equivalence", psor_equivalence},
        {"monotonicity in n", monotonicity},
        {"Skorokhod trend", skorokhod},
        {"RBDSDE residual", residual},
        {"energy identity", energy},
        {"gradient decay", gradient_decay},
        {"obstacle smoothing", smoothing},
        {"calculus inequalities", calculus},
        {"convex combiner", mazur},
        {"determinism", determinism},
    };
    int failed = 0, idx = 0;
    for (const auto& [title, fn] : criteria) {
        ++idx;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += o.pass ? 0 : 1;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << idx << ". " << title << ": " << o.detail << std::endl;
    }
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria pass")) << std::endl;
    return failed ? 1 : 0;
}
