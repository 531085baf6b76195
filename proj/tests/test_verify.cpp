#include <cmath>

#include <doctest.h>

#include "ospde/errors.hpp"
#include "ospde/noise.hpp"
#include "ospde/solver.hpp"
#include "ospde/verify.hpp"
#include "support.hpp"

using namespace ospde;
using nlohmann::json;

namespace {

ObstacleProblem shell(const json& f, std::size_t nodes = 121, std::size_t steps = 50) {
    return build_problem({{"grid", testing::grid_block(-3, 3, nodes, steps, 0.25)},
                          {"coefficients", {{"f", f}}},
                          {"terminal", {{"family", "zero"}}}});
}

}  // namespace

TEST_CASE("residual of the zero instance vanishes pathwise") {
    const auto p = build_problem(testing::zero_problem());
    const auto noise = sample_backward_noise(5, p.grid.time_steps(), 1, p.grid.dt());
    const auto sol = solve_penalized(p, 8.0, noise);
    const ForwardPathBatch paths(6, 500, p.grid);
    const auto rs = verify_bsde_residual(sol, p, paths, noise);
    CHECK(rs.pass);
    for (const auto& s : rs.slices) {
        CHECK(s.mean == 0.0);
        CHECK(s.max_abs == 0.0);
    }
    const auto other = sample_backward_noise(99, p.grid.time_steps(), 1, p.grid.dt());
    CHECK_THROWS_AS(verify_bsde_residual(sol, p, paths, other), ConfigError);
}

TEST_CASE("K is nondecreasing from zero") {
    const auto p = build_problem(testing::put_problem(120, 60));
    const auto noise = sample_backward_noise(7, p.grid.time_steps(), 1, p.grid.dt());
    const auto sol = solve_penalized(p, 64.0, noise);
    const ForwardPathBatch paths(8, 200, p.grid);
    const Box region = path_region(p.grid, 2.0);
    bool pushed = false;
    for (std::size_t m = 0; m < paths.size(); ++m) {
        const auto pp = path_processes(sol, p, paths.path(m), region);
        REQUIRE(pp.K.size() == p.grid.time_steps() + 1);
        CHECK(pp.K[0] == 0.0);
        for (std::size_t k = 0; k + 1 < pp.K.size(); ++k) CHECK(pp.K[k + 1] >= pp.K[k]);
        pushed = pushed || pp.K.back() > 0.0;
    }
    CHECK(pushed);
}

TEST_CASE("Skorokhod table") {
    auto cfg = testing::zero_problem(81, 40);
    cfg["terminal"] = {{"family", "bump"}, {"amplitude", 1}, {"center", 0.0}, {"width", 0.4}};
    const auto p = build_problem(cfg);
    const auto noise = sample_backward_noise(9, p.grid.time_steps(), 1, p.grid.dt());
    const auto sw = penalization_sweep(p, {1, 4, 16}, noise, 1e-8);
    const ForwardPathBatch paths(10, 300, p.grid);
    const auto t = verify_skorokhod(sw.solutions, p, paths);
    for (const auto& r : t.rows) {
        CHECK(r.sup_negative_sq == 0.0);
        CHECK(r.reflection == 0.0);
        CHECK(r.penalty_energy == 0.0);
    }

    CHECK(count_increases({3, 2, 1}) == 0);
    CHECK(count_increases({1, 2, 0}) == 1);
    CHECK(decreasing_trend({4, 3, 3.5, 1}));
    CHECK_FALSE(decreasing_trend({1, 2, 3}));
}

TEST_CASE("energy identity shells") {
    const auto zero = shell({{"family", "zero"}});
    const ForwardPathBatch paths(11, 1000, zero.grid);
    const auto rep = verify_energy_identity(zero, paths);
    for (const auto& r : rep.rows) {
        CHECK(r.lhs == 0.0);
        CHECK(r.rhs == 0.0);
    }
    const auto neg = shell({{"family", "constant"}, {"value", -1}});
    CHECK_THROWS_AS(verify_energy_identity(neg, paths), DomainError);
    auto obstacle_cfg = testing::put_problem(61, 20);
    CHECK_THROWS_AS(verify_energy_identity(build_problem(obstacle_cfg), paths), ConfigError);
}

TEST_CASE("energy RHS estimator agrees across independent batches") {
    const auto bump = shell({{"family", "bump"}, {"amplitude", 2}, {"center", 0.3}, {"width", 0.4}});
    const ForwardPathBatch a(12, 20000, bump.grid), b(13, 20000, bump.grid);
    const auto ra = verify_energy_identity(bump, a);
    const auto rb = verify_energy_identity(bump, b);
    REQUIRE(ra.rows.size() == rb.rows.size());
    for (std::size_t i = 0; i < ra.rows.size(); ++i) {
        CHECK(ra.rows[i].lhs == rb.rows[i].lhs);
        const double joint = std::hypot(ra.rows[i].rhs_stderr, rb.rows[i].rhs_stderr);
        CHECK(joint > 0.0);
        CHECK(std::abs(ra.rows[i].rhs - rb.rows[i].rhs) <= 3 * joint);
    }
}

TEST_CASE("occupation weight") {
    const auto g = testing::line(-3, 3, 61, 10, 0.25);
    const Box core = g.core();
    const Field w0 = occupation_weight(g, core, 0.0);
    double mass = 0.0;
    for (std::size_t i = 0; i < g.nodes(); ++i) {
        const double x = g.point(i)[0];
        const double expect = std::abs(std::abs(x) - core.upper[0]) < 1e-12 ? 0.5 : (core.contains(g.point(i)) ? 1.0 : 0.0);
        CHECK(w0[i] == doctest::Approx(expect));
        mass += w0[i] * g.dx();
    }
    CHECK(mass == doctest::Approx(core.volume()).epsilon(0.05));
    const Field w1 = occupation_weight(g, core, 0.25);
    for (double x : w1) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
}
