#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ospde/noise.hpp"
#include "ospde/problem.hpp"
#include "ospde/solver.hpp"

namespace ospde {

/// Processes of one forward path: Y = u(t_k, W_k), Z = grad u(t_k, W_k),
/// S = v(t_k, W_k), K_k = n sum_{j<k} (Y_j - S_j)^- dt.
struct PathProcesses {
    std::size_t index = 0;
    std::vector<double> Y;
    std::vector<double> Z;  ///< dim values per slice
    std::vector<double> S;
    std::vector<double> K;
    /// First slice at which W left the validity region; nt + 1 if it never did.
    /// Entries at and after it are not computed (left at zero).
    std::size_t exit_step = 0;

    bool stayed_inside(std::size_t nt) const { return exit_step > nt; }
};

PathProcesses path_processes(const PenalizedSolution& sol, const ObstacleProblem& problem, const ForwardPath& path,
                             const Box& region);

/// Validity region for paths: the grid shrunk by `guard_cells` spacings.
Box path_region(const SpaceTimeGrid& grid, double guard_cells);

struct SliceStat {
    std::size_t k = 0;
    double t = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    double max_abs = 0.0;
    double bound = 0.0;
    bool pass = false;
};

struct ResidualStats {
    std::vector<SliceStat> slices;
    std::size_t paths = 0;     ///< paths used
    std::size_t excluded = 0;  ///< paths that left the validity region
    double allowance = 0.0;    ///< c (dt + dx)
    bool pass = false;

    double excluded_fraction() const {
        return paths + excluded == 0 ? 0.0 : static_cast<double>(excluded) / static_cast<double>(paths + excluded);
    }
    nlohmann::json to_json() const;
};

struct ResidualOptions {
    /// Checked slices as fractions of T.
    std::vector<double> slice_fractions{0.0, 0.25, 0.5, 0.75};
    /// c in the discretization allowance c (dt + dx).
    double allowance_constant = 0.0;
    double guard_cells = 2.0;
};

/**
 * Pathwise residual of the discrete doubly stochastic representation
 *
 *   R_k = Y_k - [ Y_N + sum_{j>=k} f_{j+1} dt + (K_N - K_k) + sum_{j>=k} (g_{j+1} - g_j) . dW_j
 *                 + sum_{j>=k} h_{j+1} . dB_j - sum_{j>=k} Z_j . dW_j ]
 *
 * with coefficients evaluated at (t_j, W_j, Y_j, Z_j). Paths leaving the
 * validity region are excluded and counted. Pass iff on every checked slice
 * |mean| <= 3 stderr + allowance.
 *
 * Throws ConfigError when `noise` is not the noise `sol` was computed with.
 */
ResidualStats verify_bsde_residual(const PenalizedSolution& sol, const ObstacleProblem& problem,
                                   const ForwardPathBatch& paths, const BackwardNoisePath& noise,
                                   const ResidualOptions& options = {});

struct SkorokhodRow {
    double n = 0.0;
    double sup_negative_sq = 0.0;  ///< E^m sup_k ((Y^n_k - S_k)^-)^2
    double sup_negative_sq_stderr = 0.0;
    double reflection = 0.0;       ///< E^m sum_k (Y^lim_k - S_k)^+ dK^n_k
    double reflection_stderr = 0.0;
    double penalty_energy = 0.0;   ///< E^m n sum_k ((Y^n_k - S_k)^-)^2 dt = -E^m sum (Y^n - S) dK^n
};

struct SkorokhodTable {
    std::vector<SkorokhodRow> rows;
    std::size_t paths = 0;
    std::size_t truncated = 0;  ///< paths cut at their exit time
    bool sup_decreasing = false;
    bool reflection_decreasing = false;
    bool pass = false;

    nlohmann::json to_json() const;
};

/// Number of pairs i < j with values[i] < values[j] (ties are not inversions).
std::size_t count_increases(const std::vector<double>& values);
/// Nonincreasing up to at most `allowed` inversions.
bool decreasing_trend(const std::vector<double>& values, std::size_t allowed = 1);

/// Y^lim is the last solution of the sweep. Paths are truncated at their
/// first exit from the validity region.
SkorokhodTable verify_skorokhod(const std::vector<PenalizedSolution>& sols, const ObstacleProblem& problem,
                                const ForwardPathBatch& paths, double guard_cells = 2.0);

/// Gaussian bump in space times a time factor, used as a test function.
struct TestFunction {
    std::string name;
    Point center{};
    double width = 0.3;
    double time_slope = 0.0;  ///< factor (1 + time_slope * t / T)
    double eval(double t, const Point& x, int dim, double horizon) const;
};

std::vector<TestFunction> default_test_functions();

struct EnergyRow {
    double t = 0.0;
    std::size_t k = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    double rhs_stderr = 0.0;
    double relative_error = 0.0;
    bool pass = false;
};

struct MeasureRow {
    std::string name;
    double grid_value = 0.0;
    double mc_value = 0.0;
    double mc_stderr = 0.0;
    bool pass = false;
};

struct EnergyOptions {
    std::vector<double> time_fractions{0.0, 0.5};
    double relative_allowance = 0.05;
    std::vector<TestFunction> test_functions;  ///< empty: no measure check
};

struct EnergyReport {
    std::vector<EnergyRow> rows;
    std::vector<MeasureRow> measure;
    std::size_t paths = 0;
    bool pass = false;

    nlohmann::json to_json() const;
};

/**
 * Energy identity for the potential u of f >= 0 (g = h = 0, Phi = 0, no
 * obstacle), both sides under the uniform-on-core initial law:
 *
 *   LHS(t_k) = sum_x w_{t_k} u_k^2 dx + sum_{j>=k} dt sum_x w_{t_j} |grad_h u_j|^2 dx
 *   RHS(t_k) = |core| E[(sum_{j>=k} f(t_{j+1}, W_{j+1}) dt)^2]
 *
 * where w_t is the density of W_t. With test functions, also compares
 * sum w phi nu against |core| E sum phi(t_{j+1}, W_{j+1}) dA_j, the grid
 * density of nu being read off the discrete equation.
 *
 * Throws DomainError if f < 0 somewhere on the mesh, ConfigError if the
 * shell has g, h, Phi or an obstacle.
 */
EnergyReport verify_energy_identity(const ObstacleProblem& shell, const ForwardPathBatch& paths,
                                    const EnergyOptions& options = {});

/// Density on the grid nodes of W_t when W_0 is uniform on `box`, times |box|
/// (so it is the core indicator at t = 0, one half on its faces).
Field occupation_weight(const SpaceTimeGrid& grid, const Box& box, double t);

}  // namespace ospde
