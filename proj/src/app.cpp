#include "ospde/app.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ospde/errors.hpp"
#include "ospde/io.hpp"
#include "ospde/lemmas.hpp"
#include "ospde/noise.hpp"
#include "ospde/parallel.hpp"
#include "ospde/verify.hpp"

namespace ospde::app {

using nlohmann::json;

namespace {

void allow_keys(const json& block, std::initializer_list<const char*> keys, const std::string& where) {
    if (!block.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : block.items()) {
        bool ok = false;
        for (const char* k : keys) ok = ok || key == k;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T get_or(const json& block, const char* key, T fallback, const std::string& where) {
    if (!block.contains(key)) return fallback;
    try {
        return block[key].get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + "." + key + ": wrong type");
    }
}

std::vector<double> number_list(const json& v, const std::string& where) {
    if (!v.is_array() || v.empty()) throw ConfigError(where + ": expected a nonempty array of numbers");
    std::vector<double> out;
    for (const auto& x : v) {
        if (!x.is_number()) throw ConfigError(where + ": expected numbers");
        out.push_back(x.get<double>());
    }
    return out;
}

std::vector<double> increasing(const json& v, const std::string& where) {
    auto out = number_list(v, where);
    for (std::size_t i = 1; i < out.size(); ++i) {
        if (!(out[i] > out[i - 1])) throw ConfigError(where + ": must be strictly increasing");
    }
    return out;
}

// Small CSV table with a fixed header.
class Table {
public:
    explicit Table(std::vector<std::string> header) : width_(header.size()) {
        for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
        out_ << '\n';
    }
    void row(std::initializer_list<double> values) {
        if (values.size() != width_) throw ShapeError("csv row width");
        std::size_t i = 0;
        for (double v : values) out_ << (i++ ? "," : "") << format_number(v);
        out_ << '\n';
    }
    std::string str() const { return out_.str(); }

private:
    std::size_t width_;
    std::ostringstream out_;
};

BackwardNoisePath noise_for(const ObstacleProblem& p, const RunConfig& cfg) {
    return sample_backward_noise(cfg.seeds.noise, p.grid.time_steps(), static_cast<std::size_t>(p.coeffs.d1),
                                 p.grid.dt());
}

json grid_json(const SpaceTimeGrid& g) {
    json axes = json::array();
    for (int a = 0; a < g.dim(); ++a) {
        axes.push_back({{"lower", g.axis(a).lower}, {"upper", g.axis(a).upper}, {"nodes", g.axis(a).nodes}});
    }
    return {{"axes", axes},
            {"time_steps", g.time_steps()},
            {"horizon", g.horizon()},
            {"dt", g.dt()},
            {"core_margin", g.core_margin()}};
}

// Hypothesis gate shared by every problem-driven command; false if solving should not proceed.
bool gate(const ObstacleProblem& p, const RunConfig& cfg, CommandResult& res) {
    const HypothesisReport rep = validate_hypotheses(p.coeffs, p.grid, cfg.probes, cfg.seeds.probes);
    res.report["hypotheses"] = rep.to_json();
    res.checks.push_back({"hypotheses.contraction_margin", rep.contraction_margin, 0.0, rep.contraction_pass});
    res.checks.push_back({"hypotheses.zero_coefficients_finite", rep.zero_coefficients_finite ? 1.0 : 0.0, 1.0,
                          rep.zero_coefficients_finite});
    return rep.pass();
}

std::filesystem::path out_file(const RunConfig& cfg, const char* name) { return cfg.out_dir / name; }

void cmd_solve(const RunConfig& cfg, CommandResult& res) {
    const ObstacleProblem p = build_problem(cfg.problem);
    if (!gate(p, cfg, res)) return;
    const auto noise = noise_for(p, cfg);
    const PenalizedSolution sol = solve_penalized(p, cfg.level, noise, cfg.solver);
    const auto meas = extract_measure(sol, p);
    double rho_min = 0.0;
    for (double r : sol.rho.data()) rho_min = std::min(rho_min, r);
    res.checks.push_back({"solve.finite", sol.u.all_finite() ? 1.0 : 0.0, 1.0, sol.u.all_finite()});
    res.checks.push_back({"solve.penalty_nonnegative", rho_min, 0.0, rho_min >= 0.0});
    res.checks.push_back({"solve.complementarity_defect", meas.complementarity_defect, 0.0,
                          meas.complementarity_defect == 0.0});
    json rep = {{"level", cfg.level},
                {"dt_times_n", p.grid.dt() * cfg.level},
                {"max_policy_iterations", sol.max_policy_iterations},
                {"measure_mass", meas.total},
                {"complementarity_defect", meas.complementarity_defect}};
    if (p.coeffs.g_is_zero() && p.coeffs.h_is_zero()) {
        const PsorResult oracle = psor_oracle(p, cfg.psor);
        const double dist = core_sup_distance(p.grid, sol.u, oracle.u);
        rep["oracle_sup_distance"] = dist;
        res.checks.push_back({"solve.oracle_sup_distance", dist, cfg.oracle_distance_tol, dist <= cfg.oracle_distance_tol});
    }
    res.report["solve"] = rep;
    if (cfg.write_fields) {
        write_file_atomic(out_file(cfg, "u.csv"), field_csv(p.grid, sol.u, "u"));
        write_file_atomic(out_file(cfg, "measure.csv"), field_csv(p.grid, meas.masses, "mass"));
    }
}

SweepResult run_sweep(const ObstacleProblem& p, const RunConfig& cfg, const BackwardNoisePath& noise,
                      CommandResult& res) {
    SweepResult sw = penalization_sweep(p, cfg.schedule, noise, cfg.monotonicity_tol, cfg.solver);
    res.report["sweep"] = sw.report.to_json();
    res.checks.push_back(
        {"sweep.monotonicity_defect", sw.report.max_monotonicity_defect, cfg.monotonicity_tol, sw.report.monotone});
    Table t({"n", "monotonicity_defect", "cauchy_h1", "cauchy_t_norm", "obstacle_defect", "mass",
             "complementarity_vs_limit"});
    for (const auto& l : sw.report.levels) {
        t.row({l.n, l.monotonicity_defect, l.cauchy_h1, l.cauchy_t_norm, l.obstacle_defect, l.mass,
               l.complementarity_vs_limit});
    }
    write_file_atomic(out_file(cfg, "sweep.csv"), t.str());
    return sw;
}

void cmd_sweep(const RunConfig& cfg, CommandResult& res) {
    const ObstacleProblem p = build_problem(cfg.problem);
    if (!gate(p, cfg, res)) return;
    run_sweep(p, cfg, noise_for(p, cfg), res);
}

void cmd_verify(const RunConfig& cfg, CommandResult& res) {
    const ObstacleProblem p = build_problem(cfg.problem);
    if (!gate(p, cfg, res)) return;
    const json& v = cfg.verify;
    const auto noise = noise_for(p, cfg);
    const bool want_residual = get_or<bool>(v, "residual", true, "verify");
    const bool want_skorokhod = get_or<bool>(v, "skorokhod", true, "verify");
    const double guard = get_or<double>(v, "guard_cells", 2.0, "verify");
    const ForwardPathBatch batch(cfg.seeds.paths, cfg.paths, p.grid);

    SweepResult sw;
    if (want_skorokhod || want_residual) sw = run_sweep(p, cfg, noise, res);

    if (want_residual) {
        const PenalizedSolution* sol = nullptr;
        for (const auto& s : sw.solutions) {
            if (s.level == cfg.level) sol = &s;
        }
        PenalizedSolution own;
        if (!sol) {
            own = solve_penalized(p, cfg.level, noise, cfg.solver);
            sol = &own;
        }
        ResidualOptions ro;
        ro.allowance_constant = cfg.residual_allowance;
        ro.guard_cells = guard;
        if (v.contains("residual_slices")) ro.slice_fractions = number_list(v["residual_slices"], "verify.residual_slices");
        const ResidualStats rs = verify_bsde_residual(*sol, p, batch, noise, ro);
        res.report["residual"] = rs.to_json();
        res.report["residual"]["level"] = cfg.level;
        Table t({"k", "t", "mean", "stderr", "max_abs", "bound"});
        for (const auto& s : rs.slices) {
            t.row({static_cast<double>(s.k), s.t, s.mean, s.stderr_, s.max_abs, s.bound});
            res.checks.push_back({"verify.residual.k" + std::to_string(s.k), std::abs(s.mean), s.bound, s.pass});
        }
        write_file_atomic(out_file(cfg, "residual.csv"), t.str());
    }

    if (want_skorokhod) {
        const SkorokhodTable sk = verify_skorokhod(sw.solutions, p, batch, guard);
        res.report["skorokhod"] = sk.to_json();
        std::vector<double> sups, refl;
        Table t({"n", "sup_negative_sq", "sup_negative_sq_stderr", "reflection", "reflection_stderr",
                 "penalty_energy"});
        for (const auto& r : sk.rows) {
            t.row({r.n, r.sup_negative_sq, r.sup_negative_sq_stderr, r.reflection, r.reflection_stderr,
                   r.penalty_energy});
            sups.push_back(r.sup_negative_sq);
            refl.push_back(r.reflection);
        }
        write_file_atomic(out_file(cfg, "skorokhod.csv"), t.str());
        res.checks.push_back({"verify.skorokhod.sup_negative_sq_inversions", static_cast<double>(count_increases(sups)),
                              1.0, sk.sup_decreasing});
        res.checks.push_back({"verify.skorokhod.reflection_inversions", static_cast<double>(count_increases(refl)), 1.0,
                              sk.reflection_decreasing});
    }

    if (v.contains("energy")) {
        const json& e = v["energy"];
        allow_keys(e, {"f", "times", "test_functions", "paths"}, "verify.energy");
        if (!e.contains("f")) throw ConfigError("verify.energy: missing key 'f'");
        json shell_cfg = {{"grid", cfg.problem["grid"]},
                          {"coefficients", {{"f", e["f"]}}},
                          {"terminal", {{"family", "zero"}}}};
        const ObstacleProblem shell = build_problem(shell_cfg);
        EnergyOptions eo;
        eo.relative_allowance = cfg.energy_relative;
        if (e.contains("times")) eo.time_fractions = number_list(e["times"], "verify.energy.times");
        if (get_or<bool>(e, "test_functions", false, "verify.energy")) eo.test_functions = default_test_functions();
        const std::size_t m = get_or<std::size_t>(e, "paths", cfg.energy_paths, "verify.energy");
        const ForwardPathBatch ebatch(cfg.seeds.paths, m, shell.grid);
        const EnergyReport er = verify_energy_identity(shell, ebatch, eo);
        res.report["energy"] = er.to_json();
        Table t({"t", "lhs", "rhs", "rhs_stderr", "relative_error"});
        for (const auto& r : er.rows) {
            t.row({r.t, r.lhs, r.rhs, r.rhs_stderr, r.relative_error});
            res.checks.push_back({"verify.energy.k" + std::to_string(r.k), std::abs(r.lhs - r.rhs),
                                  3.0 * r.rhs_stderr + eo.relative_allowance * std::abs(r.lhs), r.pass});
        }
        write_file_atomic(out_file(cfg, "energy.csv"), t.str());
        if (!er.measure.empty()) {
            Table mt({"index", "grid", "monte_carlo", "stderr"});
            for (std::size_t i = 0; i < er.measure.size(); ++i) {
                const auto& r = er.measure[i];
                mt.row({static_cast<double>(i), r.grid_value, r.mc_value, r.mc_stderr});
                res.checks.push_back({"verify.measure." + r.name, std::abs(r.grid_value - r.mc_value),
                                      3.0 * r.mc_stderr, r.pass});
            }
            write_file_atomic(out_file(cfg, "measure_representation.csv"), mt.str());
        }
    }
}

SpaceTimeField field_of(const SpaceTimeGrid& grid, const json& spec, const char* role) {
    const CoefficientSet c = make_coefficients(json{{role, spec}}, grid.dim());
    const std::size_t d = static_cast<std::size_t>(grid.dim());
    const bool vector = std::string(role) == "g";
    SpaceTimeField out = SpaceTimeField::on(grid, vector ? d : 1);
    const Vec2 zero{};
    for (std::size_t k = 0; k <= grid.time_steps(); ++k) {
        for (std::size_t n = 0; n < grid.nodes(); ++n) {
            const Point x = grid.point(n);
            if (vector) {
                c.g(grid.time(k), x, 0.0, zero, std::span<double>(&out.at(k, n, 0), d));
            } else {
                out.at(k, n) = c.f(grid.time(k), x, 0.0, zero);
            }
        }
    }
    return out;
}

void cmd_lemmas(const RunConfig& cfg, CommandResult& res) {
    const json& l = cfg.lemmas;
    allow_keys(l, {"calculus", "smoothing", "gradient_decay", "mazur"}, "lemmas");
    if (l.contains("calculus")) {
        allow_keys(l["calculus"], {"count"}, "lemmas.calculus");
        const auto count = get_or<std::size_t>(l["calculus"], "count", 10000, "lemmas.calculus");
        const CalculusProperty cp = lemma_calculus_property(count, cfg.seeds.probes);
        res.report["calculus"] = cp.to_json();
        res.checks.push_back({"lemmas.calculus.violations", static_cast<double>(cp.violations), 0.0, cp.pass});
    }
    if (l.contains("smoothing")) {
        const json& s = l["smoothing"];
        allow_keys(s, {"schedule", "delta"}, "lemmas.smoothing");
        const ObstacleProblem p = build_problem(cfg.problem);
        const auto sched = s.contains("schedule") ? increasing(s["schedule"], "lemmas.smoothing.schedule") : cfg.schedule;
        const double delta = get_or<double>(s, "delta", 0.05, "lemmas.smoothing");
        const ForwardPathBatch batch(cfg.seeds.paths, cfg.paths, p.grid);
        const SmoothingReport sr = lemma_obstacle_smoothing(p, batch, sched, delta);
        res.report["smoothing"] = sr.to_json();
        Table t({"n", "sup_sq_error", "stderr", "dominated", "min_margin"});
        std::size_t violations = 0;
        for (const auto& r : sr.rows) {
            t.row({r.n, r.sup_sq_error, r.stderr_, static_cast<double>(r.dominated), r.min_margin});
            violations += sr.paths - r.dominated;
        }
        write_file_atomic(out_file(cfg, "smoothing.csv"), t.str());
        res.checks.push_back({"lemmas.smoothing.domination_violations", static_cast<double>(violations), 0.0,
                              sr.all_dominated});
        res.checks.push_back({"lemmas.smoothing.decreasing", sr.decreasing ? 1.0 : 0.0, 1.0, sr.decreasing});
    }
    if (l.contains("gradient_decay")) {
        const json& g = l["gradient_decay"];
        allow_keys(g, {"schedule", "f", "div_g", "spread_limit"}, "lemmas.gradient_decay");
        const SpaceTimeGrid grid = make_grid(cfg.problem.at("grid"));
        const auto sched = g.contains("schedule") ? increasing(g["schedule"], "lemmas.gradient_decay.schedule")
                                                  : std::vector<double>{4, 16, 64, 256};
        const double limit = get_or<double>(g, "spread_limit", 10.0, "lemmas.gradient_decay");
        json reports = json::array();
        Table t({"case", "n", "grad_integral", "bracket", "ratio"});
        if (g.contains("f")) {
            if (!g["f"].is_array()) throw ConfigError("lemmas.gradient_decay.f: expected an array of families");
            for (std::size_t i = 0; i < g["f"].size(); ++i) {
                const auto rep = lemma_gradient_decay(grid, field_of(grid, g["f"][i], "f"), sched, limit);
                for (const auto& r : rep.rows) t.row({static_cast<double>(i), r.n, r.grad_integral, r.bracket, r.ratio});
                res.checks.push_back({"lemmas.gradient_decay.f" + std::to_string(i) + ".spread", rep.spread, limit, rep.pass});
                reports.push_back(rep.to_json());
            }
        }
        if (g.contains("div_g")) {
            const auto rep = lemma_gradient_decay_div(grid, field_of(grid, g["div_g"], "g"), sched);
            for (const auto& r : rep.rows) t.row({-1.0, r.n, r.grad_integral, r.bracket, r.ratio});
            res.checks.push_back({"lemmas.gradient_decay.div_g.decreasing", rep.decreasing ? 1.0 : 0.0, 1.0, rep.pass});
            reports.push_back(rep.to_json());
        }
        res.report["gradient_decay"] = reports;
        write_file_atomic(out_file(cfg, "gradient_decay.csv"), t.str());
    }
    if (l.contains("mazur")) {
        const json& m = l["mazur"];
        allow_keys(m, {"vectors", "dim", "iterations", "ratio_limit"}, "lemmas.mazur");
        const auto count = get_or<std::size_t>(m, "vectors", 16, "lemmas.mazur");
        const auto dim = get_or<std::size_t>(m, "dim", 32, "lemmas.mazur");
        const auto its = get_or<std::size_t>(m, "iterations", 5000, "lemmas.mazur");
        const double limit = get_or<double>(m, "ratio_limit", 0.1, "lemmas.mazur");
        const auto xs = oscillating_instance(count, dim, cfg.seeds.probes);
        const std::vector<double> target(dim, 0.0);
        const MazurResult mr = mazur_combine(xs, target, its);
        double sum = 0.0, neg = 0.0;
        for (double w : mr.weights) {
            sum += w;
            neg = std::max(neg, -w);
        }
        const double simplex_err = std::max(std::abs(sum - 1.0), neg);
        const double ratio = mr.distance / mr.best_single_distance;
        res.report["mazur"] = mr.to_json();
        res.checks.push_back({"lemmas.mazur.distance_ratio", ratio, limit, ratio <= limit});
        res.checks.push_back({"lemmas.mazur.simplex_error", simplex_err, 1e-12, simplex_err <= 1e-12});
    }
}

void cmd_oracle(const RunConfig& cfg, CommandResult& res) {
    const ObstacleProblem p = build_problem(cfg.problem);
    if (!gate(p, cfg, res)) return;
    const PsorResult oracle = psor_oracle(p, cfg.psor);
    const auto noise = noise_for(p, cfg);
    std::vector<double> dist(cfg.schedule.size());
    parallel_for(cfg.schedule.size(), [&](std::size_t i) {
        const auto sol = solve_penalized(p, cfg.schedule[i], noise, cfg.solver);
        dist[i] = core_sup_distance(p.grid, sol.u, oracle.u);
    });
    Table t({"n", "sup_distance"});
    json rows = json::array();
    bool decreasing = true;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        t.row({cfg.schedule[i], dist[i]});
        rows.push_back({{"n", cfg.schedule[i]}, {"sup_distance", dist[i]}});
        if (i > 0) decreasing = decreasing && dist[i] < dist[i - 1];
    }
    write_file_atomic(out_file(cfg, "oracle.csv"), t.str());
    if (cfg.write_fields) write_file_atomic(out_file(cfg, "psor.csv"), field_csv(p.grid, oracle.u, "u"));
    std::size_t its = 0;
    for (auto i : oracle.iterations) its = std::max(its, i);
    res.report["oracle"] = {{"rows", rows}, {"psor_max_residual", oracle.max_residual}, {"psor_max_iterations", its}};
    res.checks.push_back({"oracle.psor_residual", oracle.max_residual, cfg.psor.tolerance,
                          oracle.max_residual <= cfg.psor.tolerance});
    res.checks.push_back({"oracle.distance_decreasing", decreasing ? 1.0 : 0.0, 1.0, decreasing});
    res.checks.push_back(
        {"oracle.final_sup_distance", dist.back(), cfg.oracle_distance_tol, dist.back() <= cfg.oracle_distance_tol});
}

}  // namespace

json load_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
}

RunConfig parse_run_config(const json& doc, std::optional<std::uint64_t> seed_override) {
    allow_keys(doc,
               {"schema_version", "description", "problem", "schedule", "level", "seeds", "monte_carlo", "hypotheses",
                "tolerances", "solver", "verify", "lemmas", "output"},
               "config");
    if (!doc.contains("schema_version") || !doc["schema_version"].is_number_integer() ||
        doc["schema_version"].get<int>() != kSchemaVersion) {
        throw ConfigError("config: schema_version must be " + std::to_string(kSchemaVersion));
    }
    if (!doc.contains("problem")) throw ConfigError("config: missing key 'problem'");
    if (!doc.contains("seeds")) throw ConfigError("config: missing key 'seeds' (all seeds must be explicit)");

    RunConfig cfg;
    cfg.problem = doc["problem"];
    const json& seeds = doc["seeds"];
    allow_keys(seeds, {"noise", "paths", "probes"}, "seeds");
    for (const char* k : {"noise", "paths", "probes"}) {
        if (!seeds.contains(k) || !seeds[k].is_number_unsigned()) {
            throw ConfigError(std::string("seeds.") + k + " must be given as a nonnegative integer");
        }
    }
    cfg.seeds = {seeds["noise"].get<std::uint64_t>(), seeds["paths"].get<std::uint64_t>(),
                 seeds["probes"].get<std::uint64_t>()};
    if (seed_override) cfg.seeds = {*seed_override, *seed_override + 1, *seed_override + 2};

    cfg.schedule = doc.contains("schedule") ? increasing(doc["schedule"], "schedule")
                                            : std::vector<double>{1, 2, 4, 8, 16, 32, 64, 128, 256};
    for (double n : cfg.schedule) {
        if (!(n >= 0.0)) throw ConfigError("schedule: levels must be >= 0");
    }
    cfg.level = get_or<double>(doc, "level", cfg.schedule.back(), "config");
    if (!(cfg.level >= 0.0)) throw ConfigError("level must be >= 0");

    if (doc.contains("monte_carlo")) {
        const json& mc = doc["monte_carlo"];
        allow_keys(mc, {"paths", "energy_paths"}, "monte_carlo");
        cfg.paths = get_or<std::size_t>(mc, "paths", cfg.paths, "monte_carlo");
        cfg.energy_paths = get_or<std::size_t>(mc, "energy_paths", cfg.energy_paths, "monte_carlo");
    }
    if (doc.contains("hypotheses")) {
        allow_keys(doc["hypotheses"], {"probes"}, "hypotheses");
        cfg.probes = get_or<std::size_t>(doc["hypotheses"], "probes", cfg.probes, "hypotheses");
    }
    if (doc.contains("tolerances")) {
        const json& t = doc["tolerances"];
        allow_keys(t, {"monotonicity", "oracle_distance", "residual_allowance", "energy_relative", "psor"}, "tolerances");
        cfg.monotonicity_tol = get_or<double>(t, "monotonicity", cfg.monotonicity_tol, "tolerances");
        cfg.oracle_distance_tol = get_or<double>(t, "oracle_distance", cfg.oracle_distance_tol, "tolerances");
        cfg.residual_allowance = get_or<double>(t, "residual_allowance", cfg.residual_allowance, "tolerances");
        cfg.energy_relative = get_or<double>(t, "energy_relative", cfg.energy_relative, "tolerances");
        cfg.psor.tolerance = get_or<double>(t, "psor", cfg.psor.tolerance, "tolerances");
    }
    if (doc.contains("solver")) {
        const json& s = doc["solver"];
        allow_keys(s, {"adi_sweeps", "psor_omega", "psor_max_iterations"}, "solver");
        cfg.solver.adi_sweeps = get_or<std::size_t>(s, "adi_sweeps", cfg.solver.adi_sweeps, "solver");
        cfg.psor.omega = get_or<double>(s, "psor_omega", cfg.psor.omega, "solver");
        cfg.psor.max_iterations = get_or<std::size_t>(s, "psor_max_iterations", cfg.psor.max_iterations, "solver");
    }
    cfg.verify = doc.value("verify", json::object());
    allow_keys(cfg.verify, {"residual", "residual_slices", "skorokhod", "guard_cells", "energy"}, "verify");
    cfg.lemmas = doc.value("lemmas", json::object());
    allow_keys(cfg.lemmas, {"calculus", "smoothing", "gradient_decay", "mazur"}, "lemmas");
    if (doc.contains("output")) {
        const json& o = doc["output"];
        allow_keys(o, {"directory", "fields"}, "output");
        cfg.out_dir = get_or<std::string>(o, "directory", cfg.out_dir.string(), "output");
        cfg.write_fields = get_or<bool>(o, "fields", cfg.write_fields, "output");
    }

    // Defining inputs only: output location does not change the identity of a run.
    cfg.effective = doc;
    cfg.effective.erase("output");
    cfg.effective["seeds"] = {{"noise", cfg.seeds.noise}, {"paths", cfg.seeds.paths}, {"probes", cfg.seeds.probes}};
    cfg.effective["output_fields"] = cfg.write_fields;
    return cfg;
}

bool CommandResult::pass() const {
    if (checks.empty()) return false;
    for (const auto& c : checks) {
        if (!c.pass) return false;
    }
    return true;
}

std::vector<std::string> CommandResult::failures() const {
    std::vector<std::string> out;
    for (const auto& c : checks) {
        if (!c.pass) out.push_back(c.name);
    }
    return out;
}

CommandResult run_command(const std::string& command, const RunConfig& cfg) {
    CommandResult res;
    res.command = command;
    res.report = json::object();
    std::filesystem::create_directories(cfg.out_dir);
    if (command == "solve") {
        cmd_solve(cfg, res);
    } else if (command == "sweep") {
        cmd_sweep(cfg, res);
    } else if (command == "verify") {
        cmd_verify(cfg, res);
    } else if (command == "lemmas") {
        cmd_lemmas(cfg, res);
    } else if (command == "oracle") {
        cmd_oracle(cfg, res);
    } else {
        throw ConfigError("unknown command '" + command + "' (expected solve, sweep, verify, lemmas or oracle)");
    }

    json checks = json::array();
    for (const auto& c : res.checks) {
        checks.push_back({{"name", c.name}, {"statistic", c.statistic}, {"tolerance", c.tolerance}, {"pass", c.pass}});
    }
    json manifest = {{"tool", "ospde"},
                     {"version", kVersion},
                     {"schema_version", kSchemaVersion},
                     {"command", command},
                     {"config_hash", config_hash(cfg.effective)},
                     {"seeds", {{"noise", cfg.seeds.noise}, {"paths", cfg.seeds.paths}, {"probes", cfg.seeds.probes}}},
                     {"schedule", cfg.schedule},
                     {"level", cfg.level},
                     {"checks", checks},
                     {"failures", res.failures()},
                     {"pass", res.pass()},
                     {"report", res.report}};
    if (cfg.problem.contains("grid")) {
        try {
            manifest["grid"] = grid_json(make_grid(cfg.problem["grid"]));
        } catch (const ConfigError&) {
        }
    }
    write_json_atomic(cfg.out_dir / "manifest.json", manifest);
    return res;
}

}  // namespace ospde::app
