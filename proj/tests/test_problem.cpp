#include <cmath>
#include <random>

#include <doctest.h>

#include "ospde/errors.hpp"
#include "ospde/problem.hpp"
#include "support.hpp"

using namespace ospde;
using nlohmann::json;

namespace {

json stochastic_block(double alpha, double beta) {
    return {{"f", {{"family", "sine"}, {"y_coeff", 0.5}, {"z_coeff", 0.5}}},
            {"g", {{"family", "linear_gradient"}, {"alpha", alpha}}},
            {"h", {{"family", "sine"}, {"offset", 0.3}, {"y_coeff", 0.5}, {"z_coeff", beta}}},
            {"lipschitz", {{"C", 0.5}, {"alpha", alpha}, {"beta", beta}}}};
}

}  // namespace

TEST_CASE("contraction gate") {
    const auto grid = testing::line(-2, 2, 21, 10, 0.25);
    const auto ok = validate_hypotheses(make_coefficients(stochastic_block(0.2, 0.5), 1), grid, 500, 1);
    CHECK(ok.contraction_margin == doctest::Approx(0.175).epsilon(1e-15));
    CHECK(ok.contraction_pass);
    CHECK(ok.pass());

    const auto bad = validate_hypotheses(make_coefficients(stochastic_block(0.4, 0.5), 1), grid, 500, 1);
    CHECK(bad.contraction_margin == doctest::Approx(-0.025).epsilon(1e-12));
    CHECK_FALSE(bad.contraction_pass);
    CHECK_FALSE(bad.pass());
}

TEST_CASE("Lipschitz probes") {
    const auto grid = testing::line(-2, 2, 21, 10, 0.25);
    const json sine = {{"f", {{"family", "sine"}, {"y_coeff", 1.0}}}, {"lipschitz", {{"C", 1.0}}}};
    const auto rep = validate_hypotheses(make_coefficients(sine, 1), grid, 1000, 3);
    double empirical = 0.0;
    for (const auto& p : rep.probes) {
        if (p.coefficient == "f" && p.variable == "y") empirical = p.empirical;
    }
    // dense pair sampling of |sin a - sin b| / |a - b| over [-4, 4]
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> U(-4, 4);
    double dense = 0.0;
    for (int i = 0; i < 200000; ++i) {
        const double a = U(rng), b = a + 1e-3 * U(rng);
        dense = std::max(dense, std::abs(std::sin(a) - std::sin(b)) / std::abs(a - b));
    }
    CHECK(empirical <= 1.0 + 1e-9);
    CHECK(empirical > 0.9);
    CHECK(dense <= 1.0 + 1e-9);
    CHECK(rep.pass());

    const json understated = {{"f", {{"family", "sine"}, {"y_coeff", 1.0}}}, {"lipschitz", {{"C", 0.5}}}};
    try {
        validate_hypotheses(make_coefficients(understated, 1), grid, 200, 3);
        FAIL("expected a hypothesis violation");
    } catch (const HypothesisViolation& e) {
        CHECK(e.coefficient() == "f");
    }
    CHECK_THROWS_AS(validate_hypotheses(make_coefficients(sine, 1), grid, 0, 3), DomainError);
}

TEST_CASE("build_problem") {
    json p = testing::zero_problem();
    p["obstacle"] = {{"family", "constant"}, {"value", -1}};
    const auto ok = build_problem(p);
    CHECK(ok.has_obstacle());
    CHECK(ok.v.at(0, 0) == -1.0);

    p["obstacle"] = {{"family", "constant"}, {"value", 1}};
    try {
        build_problem(p);
        FAIL("expected rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("node") != std::string::npos);
    }

    const auto put = build_problem(testing::put_problem(60, 10));
    for (std::size_t n = 0; n < put.grid.nodes(); ++n) {
        const double x = put.grid.point(n)[0];
        CHECK(put.phi[n] == doctest::Approx(std::max(1.0 - std::exp(x), 0.0)));
        CHECK(put.v.at(put.grid.time_steps(), n) <= put.phi[n]);
    }

    json typo = testing::zero_problem();
    typo["terminal"] = {{"family", "put"}, {"strik", 1}};
    CHECK_THROWS_AS(build_problem(typo), ConfigError);
    json nan_obstacle = testing::zero_problem();
    nan_obstacle["obstacle"] = {{"family", "constant"}, {"value", "x"}};
    CHECK_THROWS_AS(build_problem(nan_obstacle), ConfigError);
    json no_terminal = testing::zero_problem();
    no_terminal["terminal"] = {{"family", "none"}};
    CHECK_THROWS_AS(build_problem(no_terminal), ConfigError);
}

TEST_CASE("discrete norms") {
    const auto grid = testing::line(0, 1, 11, 4, 1.0, 0.2);
    Field one(grid.nodes(), 1.0);
    // trapezoid-free nodal sum: 11 nodes of width 0.1
    CHECK(norms::l2(grid, one) == doctest::Approx(std::sqrt(1.1)));
    Field lin(grid.nodes());
    for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 2.0 * grid.point(i)[0];
    CHECK(norms::h1_seminorm(grid, lin) > 0.0);
    const auto zero = SpaceTimeField::on(grid);
    const auto dn = DiscreteNorms::of(grid, zero);
    CHECK(dn.l2_sup == 0.0);
    CHECK(dn.t_norm == 0.0);
}
