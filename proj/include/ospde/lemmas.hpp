#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ospde/noise.hpp"
#include "ospde/problem.hpp"

namespace ospde {

struct GradientDecayRow {
    double n = 0.0;
    double grad_integral = 0.0;  ///< sum_k dt ||grad_h u^n_k||_2^2
    double bracket = 0.0;        ///< (1/n) int ||f||^2 + int e^{-2n(T-t)} ||f||^2
    double ratio = 0.0;          ///< grad_integral / bracket
};

struct GradientDecayReport {
    std::string variant;  ///< "f" or "div_g"
    std::vector<GradientDecayRow> rows;
    double spread = 0.0;  ///< max ratio / min ratio
    double spread_limit = 10.0;
    bool decreasing = false;  ///< grad integrals strictly decreasing in n
    bool pass = false;

    nlohmann::json to_json() const;
};

/**
 * For each n solves (d/dt + 1/2 Delta) u^n - n u^n + f = 0, u^n_T = 0 (the
 * resolvent of f at rate n) and compares the gradient energy with the bracket.
 * Pass iff the ratio spread is at most `spread_limit` and all ratios are finite.
 */
GradientDecayReport lemma_gradient_decay(const SpaceTimeGrid& grid, const SpaceTimeField& f,
                                         const std::vector<double>& schedule, double spread_limit = 10.0);

/// Same with the source div_h g for a vector field g (dim values per node).
/// Pass iff the gradient energy decreases strictly along the schedule.
GradientDecayReport lemma_gradient_decay_div(const SpaceTimeGrid& grid, const SpaceTimeField& g,
                                             const std::vector<double>& schedule);

/**
 * Exact sup_{|s-r| <= delta} |phi(s) - phi(r)| for the piecewise-linear
 * interpolant of samples on a uniform mesh with spacing dt.
 */
double modulus_of_continuity(std::span<const double> values, double dt, double delta);

struct SmoothingRow {
    double n = 0.0;
    double sup_sq_error = 0.0;  ///< E^m sup_k |Y^n_k - S_k|^2
    double stderr_ = 0.0;
    std::size_t dominated = 0;  ///< paths satisfying V^n <= omega(delta) + 2 e^{-n delta} S*
    double min_margin = 0.0;
};

struct SmoothingReport {
    std::vector<SmoothingRow> rows;
    double delta = 0.0;
    std::size_t paths = 0;
    bool decreasing = false;
    bool all_dominated = false;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// S_k = v(t_k, W_k) along each path, Y^n = exponential average of the future of S at rate n.
SmoothingReport lemma_obstacle_smoothing(const ObstacleProblem& problem, const ForwardPathBatch& paths,
                                         const std::vector<double>& schedule, double delta);

struct CalculusCheck {
    double margin_first = 0.0;   ///< sup_{[0,d]} |phi - phi(0)| - |average over [0,d] - phi(0)|
    double margin_second = 0.0;  ///< min over nodes t of the second inequality's slack
    bool pass = false;
};

/**
 * Both inequalities of the exponential-average lemma for the piecewise-linear
 * function through samples on a uniform mesh of [0, (size-1) dt]:
 *
 *   |lambda int_0^d e^{-lambda t} phi + e^{-lambda d} phi(d) - phi(0)| <= sup_{[0,d]} |phi - phi(0)|
 *   |lambda int_t^T e^{-lambda (s-t)} phi(s) ds + e^{-lambda (T-t)} phi(T) - phi(t)|
 *        <= sup_{|s-r|<=d} |phi(s) - phi(r)| + 2 e^{-lambda d} ||phi||_inf
 *
 * the second at every mesh node. Pass iff both margins are >= -tol.
 */
CalculusCheck lemma_calculus(std::span<const double> phi, double dt, double lambda, double delta,
                             double tol = 1e-12);

struct CalculusProperty {
    std::size_t tested = 0;
    std::size_t violations = 0;
    double min_margin_first = 0.0;
    double min_margin_second = 0.0;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Seeded random piecewise-linear phi on [0, 1], log-uniform lambda, uniform delta.
CalculusProperty lemma_calculus_property(std::size_t count, std::uint64_t seed, double tol = 1e-12);

struct MazurResult {
    std::vector<double> weights;
    double distance = 0.0;
    double best_single_distance = 0.0;
    std::size_t best_single_index = 0;
    std::size_t iterations = 0;

    nlohmann::json to_json() const;
};

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

/**
 * Simplex weights minimizing ||sum_i w_i x_i - target||_2 by accelerated
 * projected gradient on the Gram matrix with a fixed iteration budget. The
 * returned combination is never worse than the best single vector.
 * Throws ShapeError on inconsistent shapes, DomainError on an empty list.
 */
MazurResult mazur_combine(const std::vector<std::vector<double>>& vectors, std::span<const double> target,
                          std::size_t iterations = 5000);

/// x_i = (-1)^i e + z_i with ||z_i|| = 1/(i+1) in R^dim, target 0.
std::vector<std::vector<double>> oscillating_instance(std::size_t count, std::size_t dim, std::uint64_t seed);

}  // namespace ospde
