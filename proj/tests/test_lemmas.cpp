#include <cmath>

#include <doctest.h>

#include "ospde/errors.hpp"
#include "ospde/lemmas.hpp"
#include "support.hpp"

using namespace ospde;
using nlohmann::json;

namespace {

double dist(const std::vector<std::vector<double>>& xs, const std::vector<double>& w) {
    double s = 0.0;
    for (std::size_t j = 0; j < xs[0].size(); ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i) c += w[i] * xs[i][j];
        s += c * c;
    }
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("gradient decay with zero source") {
    const auto g = testing::line(-2, 2, 41, 20, 0.25);
    const auto rep = lemma_gradient_decay(g, SpaceTimeField::on(g), {4, 16, 64});
    REQUIRE(rep.rows.size() == 3);
    for (const auto& r : rep.rows) {
        CHECK(r.grad_integral == 0.0);
        CHECK(r.bracket == 0.0);
    }
    const auto div = lemma_gradient_decay_div(g, SpaceTimeField::on(g, 1), {4, 16});
    for (const auto& r : div.rows) CHECK(r.grad_integral == 0.0);
}

TEST_CASE("modulus of continuity") {
    std::vector<double> lin(11);
    for (std::size_t i = 0; i < lin.size(); ++i) lin[i] = 0.1 * i;
    CHECK(modulus_of_continuity(lin, 0.1, 0.25) == doctest::Approx(0.25));
    const std::vector<double> tent = {0, 1, 0};
    CHECK(modulus_of_continuity(tent, 1.0, 0.5) == doctest::Approx(0.5));
    CHECK(modulus_of_continuity(tent, 1.0, 1.5) == doctest::Approx(1.0));
    CHECK(modulus_of_continuity(tent, 1.0, 0.0) == 0.0);
}

TEST_CASE("obstacle smoothing") {
    const json grid = testing::grid_block(-3, 3, 61, 100, 0.25);
    const auto flat = build_problem({{"grid", grid},
                                     {"coefficients", {{"f", {{"family", "zero"}}}}},
                                     {"terminal", {{"family", "constant"}, {"value", 0.7}}},
                                     {"obstacle", {{"family", "constant"}, {"value", 0.7}}}});
    const ForwardPathBatch paths(3, 200, flat.grid);
    const auto rc = lemma_obstacle_smoothing(flat, paths, {1, 10, 100}, 0.05);
    for (const auto& r : rc.rows) {
        CHECK(r.sup_sq_error == doctest::Approx(0.0).scale(1e-24));
        CHECK(r.dominated == paths.size());
    }

    const auto ramp = build_problem({{"grid", grid},
                                     {"coefficients", {{"f", {{"family", "zero"}}}}},
                                     {"terminal", {{"family", "constant"}, {"value", 1}}},
                                     {"obstacle", {{"family", "time_linear"}, {"slope", 1}, {"offset", 0}}}});
    const auto rr = lemma_obstacle_smoothing(ramp, paths, {4, 16, 64, 256}, 0.05);
    CHECK(rr.all_dominated);
    CHECK(rr.decreasing);
    for (const auto& r : rr.rows) {
        // Y - S = (1 - e^{-n (T - t)}) / n, largest at t = 0
        const double e = -std::expm1(-r.n * 0.25) / r.n;
        CHECK(r.sup_sq_error == doctest::Approx(paths.weight() * e * e).epsilon(1e-10));
        CHECK(r.stderr_ == doctest::Approx(0.0).scale(1e-12));
    }
}

TEST_CASE("calculus lemma") {
    const std::vector<double> c(21, -1.5);
    const auto cc = lemma_calculus(c, 0.05, 7.0, 0.2);
    CHECK(cc.pass);
    CHECK(cc.margin_first == doctest::Approx(0.0).scale(1e-14));
    CHECK(cc.margin_second == doctest::Approx(2 * std::exp(-7.0 * 0.2) * 1.5).epsilon(1e-12));

    std::vector<double> t(101);
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = 0.01 * i;
    const double lam = 20.0, d = 0.1;
    const auto ct = lemma_calculus(t, 0.01, lam, d);
    CHECK(ct.pass);
    CHECK(ct.margin_first == doctest::Approx(d + std::expm1(-lam * d) / lam).epsilon(1e-12));
    CHECK(ct.margin_second == doctest::Approx(d + 2 * std::exp(-lam * d) + std::expm1(-lam) / lam).epsilon(1e-12));

    const auto prop = lemma_calculus_property(1000, 5);
    CHECK(prop.tested == 1000);
    CHECK(prop.violations == 0);
    CHECK(prop.min_margin_first >= -1e-12);
    CHECK(prop.min_margin_second >= -1e-12);
}

TEST_CASE("simplex projection") {
    auto a = project_to_simplex(std::vector<double>{0.3, 0.7});
    CHECK(a[0] == doctest::Approx(0.3));
    auto b = project_to_simplex(std::vector<double>{2.0, 0.0});
    CHECK(b[0] == doctest::Approx(1.0));
    CHECK(b[1] == doctest::Approx(0.0));
    auto c = project_to_simplex(std::vector<double>{-1.0, -1.0});
    CHECK(c[0] == doctest::Approx(0.5));
}

TEST_CASE("convex combiner") {
    const std::vector<double> x = {1.0, -2.0, 0.5};
    const auto one = mazur_combine({x}, x);
    CHECK(one.weights[0] == doctest::Approx(1.0));
    CHECK(one.distance == doctest::Approx(0.0).scale(1e-12));

    const std::vector<double> mx = {-1.0, 2.0, -0.5}, zero(3, 0.0);
    const auto pair = mazur_combine({x, mx}, zero);
    CHECK(pair.weights[0] == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(pair.distance < 1e-6);

    CHECK_THROWS_AS(mazur_combine({x, {1.0}}, zero), ShapeError);
    CHECK_THROWS_AS(mazur_combine({}, zero), DomainError);

    // brute force over a weight grid of step 1/60 on the 4-vector instance
    const auto xs = oscillating_instance(4, 6, 21);
    const std::vector<double> target(6, 0.0);
    const auto m = mazur_combine(xs, target);
    const int steps = 60;
    double brute = INFINITY;
    for (int i = 0; i <= steps; ++i) {
        for (int j = 0; i + j <= steps; ++j) {
            for (int k = 0; i + j + k <= steps; ++k) {
                const std::vector<double> w = {double(i) / steps, double(j) / steps, double(k) / steps,
                                               double(steps - i - j - k) / steps};
                brute = std::min(brute, dist(xs, w));
            }
        }
    }
    CHECK(m.distance <= brute + 1e-9);
    CHECK(m.distance <= m.best_single_distance);
    double sum = 0.0;
    for (double w : m.weights) {
        CHECK(w >= 0.0);
        sum += w;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    for (const auto& v : xs) CHECK(dist({v}, {1.0}) >= 1.0);
}
