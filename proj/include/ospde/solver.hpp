#pragma once

#include <cstdint>
#include <vector>

#include <json.hpp>

#include "ospde/noise.hpp"
#include "ospde/problem.hpp"

namespace ospde {

struct SolverOptions {
    std::size_t adi_sweeps = 24;
    std::size_t max_policy_iterations = 64;
};

/**
 * One backward step t_{k+1} -> t_k of the penalized equation:
 *
 *   (I - dt 1/2 Delta_h + dt n 1_A) u_k
 *       = u_{k+1} + dt [f + div_h g](t_{k+1}, ., u_{k+1}, grad u_{k+1})
 *         + h(t_{k+1}, ., u_{k+1}, grad u_{k+1}) . dB_k + dt n v_k 1_A
 *
 * with A = {u_k < v_k}. A is found by policy iteration: solve with the
 * current A, recompute A from the result, repeat until it is stable.
 *
 * Throws NumericalError on a non-finite result (message carries the step index).
 */
Field step_backward(std::span<const double> u_next, std::size_t k, double n, const ObstacleProblem& problem,
                    const BackwardNoisePath& noise, const SolverOptions& options = {},
                    std::size_t* policy_iterations = nullptr);

struct PenalizedSolution {
    double level = 0.0;
    SpaceTimeField u;
    SpaceTimeField grad;  ///< dim values per node
    SpaceTimeField rho;   ///< n (u - v)^-
    std::uint64_t noise_seed = 0;
    std::size_t max_policy_iterations = 0;
};

/// Full backward sweep from u_T = Phi. n = 0 disables the penalty.
PenalizedSolution solve_penalized(const ObstacleProblem& problem, double n, const BackwardNoisePath& noise,
                                  const SolverOptions& options = {});

struct DiscreteRegularMeasure {
    SpaceTimeField masses;       ///< rho dt dx^d per cell (slice nt carries no mass)
    double total = 0.0;
    std::vector<char> support;   ///< per cell, masses > 0
    double complementarity_defect = 0.0;  ///< sum nu (u - v)^+
};

DiscreteRegularMeasure extract_measure(const PenalizedSolution& sol, const ObstacleProblem& problem);

struct SweepLevel {
    double n = 0.0;
    double monotonicity_defect = 0.0;  ///< max (u^n - u^{n'})^+ against the next level
    double cauchy_h1 = 0.0;            ///< (sum dt |u^{n'} - u^n|_{H1}^2)^{1/2} on the core
    double cauchy_t_norm = 0.0;        ///< ||u^{n'} - u^n||_T on the core
    double obstacle_defect = 0.0;      ///< max (v - u^n)^+ on the core
    double mass = 0.0;
    double complementarity_vs_limit = 0.0;  ///< sum nu^n (u^lim - v)^+
};

struct SweepReport {
    std::vector<SweepLevel> levels;
    double max_monotonicity_defect = 0.0;
    double tolerance = 0.0;
    bool monotone = true;

    nlohmann::json to_json() const;
};

struct SweepResult {
    std::vector<PenalizedSolution> solutions;
    SweepReport report;
};

/// Solves every level of a strictly increasing schedule with the same noise
/// (levels run concurrently) and records the convergence bookkeeping.
/// A monotonicity defect above `tolerance` is flagged in the report, not thrown.
SweepResult penalization_sweep(const ObstacleProblem& problem, const std::vector<double>& schedule,
                               const BackwardNoisePath& noise, double tolerance, const SolverOptions& options = {});

struct PsorOptions {
    double omega = 1.3;
    double tolerance = 1e-10;
    std::size_t max_iterations = 100000;
};

struct PsorResult {
    SpaceTimeField u;
    std::vector<std::size_t> iterations;  ///< per step k
    double max_residual = 0.0;
};

/**
 * Deterministic reference for h = g = 0: each implicit step is solved as the
 * complementarity problem u >= v, (I - dt 1/2 Delta_h) u - b >= 0, with
 * equality where u > v, by projected SOR. Convergence is declared when the
 * natural residual max |min(u - v, M u - b)| is below the tolerance.
 *
 * Throws ConfigError if g or h is not zero, NumericalError (with the residual
 * history) if a step does not converge.
 */
PsorResult psor_oracle(const ObstacleProblem& problem, const PsorOptions& options = {});

/// max over slices and core nodes of |a - b|.
double core_sup_distance(const SpaceTimeGrid& grid, const SpaceTimeField& a, const SpaceTimeField& b);

}  // namespace ospde
