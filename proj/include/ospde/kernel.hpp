#pragma once

#include <span>
#include <utility>
#include <vector>

#include "ospde/grid.hpp"

/// Heat semigroup, time-space resolvent and exponential averaging.
namespace ospde::kernel {

struct HeatKernelParams {
    int dim = 1;
    double t = 1.0;
};

/// Gaussian density (2 pi t)^{-d/2} exp(-|x|^2 / 2t). Throws DomainError for t <= 0.
double heat_kernel_density(const HeatKernelParams& p, std::span<const double> x);

/**
 * P_t applied to a nodal field: exact convolution of q_t with the
 * piecewise-(multi)linear interpolant of `field`, the interpolant being
 * extended by zero outside the grid (Dirichlet truncation).
 *
 * t = 0 returns the input. The weights are nonnegative and sum to at most
 * one, so the output is bounded by the maximum of |field|.
 */
Field apply_semigroup(std::span<const double> field, double t, const SpaceTimeGrid& grid);

/**
 * Discrete time-space resolvent
 *
 *   (U_alpha psi)_k = S_alpha ( (U_alpha psi)_{k+1} + dt psi_k ),  (U_alpha psi)_nt = 0,
 *
 * with S_alpha = ((1 + alpha dt) I - dt (1/2) Delta_h)^{-1}. This is the
 * backward-Euler realization of int_t^T e^{-alpha (s-t)} P_{s-t} psi_s ds and
 * satisfies U_a - U_b = (b - a) U_a U_b exactly.
 */
SpaceTimeField apply_resolvent(const SpaceTimeField& psi, double alpha, const SpaceTimeGrid& grid);

struct ApproximatePotential {
    SpaceTimeField u_n;  ///< n U_n u
    SpaceTimeField f_n;  ///< n (u - u_n), so that U_0 f_n = u_n
};

/// Resolvent approximation of a potential. Throws DomainError for n < 1.
ApproximatePotential approximate_potential(const SpaceTimeField& u, double n, const SpaceTimeGrid& grid);

/**
 * lambda int_t^T e^{-lambda (s-t)} phi(s) ds + e^{-lambda (T-t)} phi(T) for the
 * piecewise-linear function through (times[i], values[i]), integrated exactly.
 * `times` must be strictly increasing; t = times.front(), T = times.back().
 */
double exp_average(std::span<const double> times, std::span<const double> values, double lambda);

/// Same on a uniform mesh with spacing dt starting at t.
double exp_average(std::span<const double> values, double dt, double lambda);

/// exp_average evaluated at every mesh time t_k (backward recursion, O(n)).
std::vector<double> exp_average_profile(std::span<const double> values, double dt, double lambda);

}  // namespace ospde::kernel
