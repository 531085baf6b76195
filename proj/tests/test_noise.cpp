#include <cmath>

#include <doctest.h>

#include "ospde/errors.hpp"
#include "ospde/noise.hpp"
#include "ospde/parallel.hpp"
#include "support.hpp"

using namespace ospde;

TEST_CASE("backward noise") {
    const auto a = sample_backward_noise(17, 400, 2, 0.01);
    const auto b = sample_backward_noise(17, 400, 2, 0.01);
    const auto c = sample_backward_noise(18, 400, 2, 0.01);
    CHECK(a.increments == b.increments);
    CHECK(a.increments != c.increments);
    REQUIRE(a.increments.size() == 800);
    double s2 = 0.0;
    for (double x : a.increments) s2 += x * x;
    // variance dt per component; chi-square with 800 dof has relative sd 0.05
    CHECK(std::abs(s2 / 800.0 / 0.01 - 1.0) < 0.2);
    CHECK(a.value(0, 0) == 0.0);
    CHECK(a.value(2, 1) == doctest::Approx(a.increment(0)[1] + a.increment(1)[1]));
}

TEST_CASE("forward paths are reproducible and start in the core") {
    const auto grid = testing::line(-3, 3, 61, 50, 0.25);
    const ForwardPathBatch batch(5, 100, grid);
    const auto p = batch.path(42);
    const auto q = batch.path(42);
    CHECK(p.positions == q.positions);
    CHECK(batch.sampling_region().contains(p.at(0)));
    for (std::size_t k = 0; k < 50; ++k) CHECK(p.at(k + 1)[0] - p.at(k)[0] == doctest::Approx(p.increment(k)[0]));
    CHECK(batch.weight() == doctest::Approx(grid.core().volume()));
    CHECK_THROWS(ForwardPathBatch(5, 1, grid));
}

TEST_CASE("stochastic integrals") {
    const std::vector<double> dw = {0.1, -0.3, 0.25, 0.05};
    const std::vector<double> zero(5, 0.0), one(5, 1.0), c5(5, 1.5);
    CHECK(forward_ito_integral(zero, dw) == 0.0);
    CHECK(forward_ito_integral(one, dw) == doctest::Approx(0.1));
    CHECK(backward_ito_integral(zero, dw) == 0.0);
    CHECK(backward_ito_integral(one, dw) == doctest::Approx(0.1));
    CHECK(symmetric_integral(zero, dw) == 0.0);
    CHECK(symmetric_integral(c5, dw) == doctest::Approx(2 * 1.5 * 0.1));
    const std::vector<double> four(4, 1.0);
    CHECK_THROWS_AS(forward_ito_integral(four, dw), ShapeError);
    CHECK_THROWS_AS(backward_ito_integral(four, dw), ShapeError);
    CHECK_THROWS_AS(symmetric_integral(four, dw), ShapeError);

    // width 2: one constant vector c = (1, -2)
    const std::vector<double> dw2 = {0.1, 0.2, -0.3, 0.4};
    const std::vector<double> cv = {1, -2, 1, -2, 1, -2};
    CHECK(symmetric_integral(cv, dw2, 2) == doctest::Approx(2 * (1 * (0.1 - 0.3) - 2 * (0.2 + 0.4))));
}

TEST_CASE("backward minus forward is the quadratic variation") {
    const auto grid = testing::line(-3, 3, 61, 100, 0.5);
    const ForwardPathBatch batch(77, 10000, grid);
    std::vector<double> qv(batch.size());
    parallel_for(batch.size(), [&](std::size_t m) {
        const auto p = batch.path(m);
        qv[m] = backward_ito_integral(p.positions, p.increments) - forward_ito_integral(p.positions, p.increments);
    });
    const double mean = pairwise_sum(qv) / qv.size();
    double var = 0.0;
    for (double x : qv) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (qv.size() - 1) / qv.size());
    CHECK(std::abs(mean - 0.5) <= 3 * se);
}

TEST_CASE("pairwise sum") {
    std::vector<double> v(1000);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 / (1.0 + i);
    double plain = 0.0;
    for (double x : v) plain += x;
    CHECK(pairwise_sum(v) == doctest::Approx(plain).epsilon(1e-13));
    CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
}
