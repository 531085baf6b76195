#include <cmath>

#include <doctest.h>

#include "ospde/noise.hpp"
#include "ospde/problem.hpp"
#include "ospde/solver.hpp"
#include "support.hpp"

using namespace ospde;

namespace {

// Backward Euler for the free heat equation through a hand-rolled Thomas sweep.
SpaceTimeField implicit_heat(const SpaceTimeGrid& grid, const Field& terminal) {
    const std::size_t n = grid.nodes(), nt = grid.time_steps();
    const double c = 0.5 * grid.dt() / (grid.dx() * grid.dx());
    SpaceTimeField u = SpaceTimeField::on(grid);
    for (std::size_t i = 0; i < n; ++i) u.at(nt, i) = terminal[i];
    std::vector<double> cp(n), dp(n);
    for (std::size_t k = nt; k-- > 0;) {
        for (std::size_t i = 0; i < n; ++i) {
            const double b = 1 + 2 * c, a = i == 0 ? 0.0 : -c, up = i + 1 == n ? 0.0 : -c;
            const double denom = b - (i == 0 ? 0.0 : a * cp[i - 1]);
            cp[i] = up / denom;
            dp[i] = (u.at(k + 1, i) - (i == 0 ? 0.0 : a * dp[i - 1])) / denom;
        }
        for (std::size_t i = n; i-- > 0;) u.at(k, i) = dp[i] - (i + 1 == n ? 0.0 : cp[i] * u.at(k, i + 1));
    }
    return u;
}

double max_abs_diff(const SpaceTimeField& a, const SpaceTimeField& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

}  // namespace

TEST_CASE("zero instance") {
    const auto p = build_problem(testing::zero_problem());
    const auto noise = sample_backward_noise(1, p.grid.time_steps(), 1, p.grid.dt());
    Field zero(p.grid.nodes(), 0.0);
    std::size_t its = 0;
    const Field uk = step_backward(zero, 3, 16.0, p, noise, {}, &its);
    for (double x : uk) CHECK(x == 0.0);
    const auto sol = solve_penalized(p, 16.0, noise);
    for (double x : sol.u.data()) CHECK(x == 0.0);
    CHECK(sol.noise_seed == 1);

    const auto sw = penalization_sweep(p, {1, 4, 16}, noise, 1e-8);
    CHECK(sw.report.max_monotonicity_defect == 0.0);
    CHECK(sw.report.monotone);
}

TEST_CASE("unconstrained instance") {
    auto cfg = testing::zero_problem(81, 40);
    cfg["terminal"] = {{"family", "bump"}, {"amplitude", 1}, {"center", 0.2}, {"width", 0.4}};
    const auto p = build_problem(cfg);
    const auto noise = sample_backward_noise(2, p.grid.time_steps(), 1, p.grid.dt());
    const auto sw = penalization_sweep(p, {1, 8, 64}, noise, 1e-8);
    for (const auto& l : sw.report.levels) CHECK(l.monotonicity_defect == 0.0);
    for (const auto& s : sw.solutions) CHECK(max_abs_diff(s.u, sw.solutions.front().u) == 0.0);
    const auto m = extract_measure(sw.solutions.back(), p);
    CHECK(m.total == 0.0);
    for (double x : m.masses.data()) CHECK(x == 0.0);

    const auto heat = implicit_heat(p.grid, p.phi);
    const auto oracle = psor_oracle(p);
    CHECK(max_abs_diff(oracle.u, heat) < 1e-10);
    CHECK(max_abs_diff(sw.solutions.front().u, heat) < 1e-10);
}

TEST_CASE("put obstacle: monotone in n, converging to PSOR") {
    const auto p = build_problem(testing::put_problem(120, 60));
    const auto noise = sample_backward_noise(3, p.grid.time_steps(), 1, p.grid.dt());
    const auto sw = penalization_sweep(p, {16, 64, 256, 1024}, noise, 1e-8);
    CHECK(sw.report.monotone);
    for (std::size_t l = 0; l + 1 < sw.solutions.size(); ++l) {
        const auto& a = sw.solutions[l].u.data();
        const auto& b = sw.solutions[l + 1].u.data();
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] <= b[i] + 1e-12);
    }
    const auto oracle = psor_oracle(p);
    CHECK(oracle.max_residual <= 1e-10);
    double prev = INFINITY;
    for (const auto& s : sw.solutions) {
        const double d = core_sup_distance(p.grid, s.u, oracle.u);
        CHECK(d < prev);
        prev = d;
        const auto m = extract_measure(s, p);
        CHECK(m.complementarity_defect == 0.0);
        CHECK(m.total > 0.0);
    }
    CHECK(prev < 5e-3);
    const auto& levels = sw.report.levels;
    for (std::size_t l = 0; l + 1 < levels.size(); ++l) {
        CHECK(levels[l + 1].complementarity_vs_limit <= levels[l].complementarity_vs_limit);
        CHECK(levels[l + 1].obstacle_defect < levels[l].obstacle_defect);
    }
}

TEST_CASE("two-dimensional ADI solve agrees with PSOR on the core") {
    using nlohmann::json;
    json cfg = {{"grid",
                 {{"axes", {{{"lower", -2}, {"upper", 2}, {"nodes", 41}}, {{"lower", -2}, {"upper", 2}, {"nodes", 41}}}},
                  {"time_steps", 20},
                  {"horizon", 0.1}}},
                {"coefficients", {{"f", {{"family", "zero"}}}}},
                {"terminal", {{"family", "bump"}, {"amplitude", 1}, {"center", {0, 0}}, {"width", 0.5}}}};
    const auto p = build_problem(cfg);
    const auto noise = sample_backward_noise(4, p.grid.time_steps(), 1, p.grid.dt());
    const auto sol = solve_penalized(p, 0.0, noise);
    const auto oracle = psor_oracle(p);
    CHECK(core_sup_distance(p.grid, sol.u, oracle.u) < 1e-8);
}
