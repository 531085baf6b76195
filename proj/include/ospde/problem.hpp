#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ospde/coefficients.hpp"
#include "ospde/grid.hpp"

namespace ospde {

/// Grid block: {"axes": [{"lower", "upper", "nodes"}, ...], "time_steps", "horizon", "core_margin"?}
SpaceTimeGrid make_grid(const nlohmann::json& block);

/**
 * Full obstacle problem instance. The obstacle is kept both as the registry
 * function (for evaluation along paths) and as a mesh field.
 */
struct ObstacleProblem {
    SpaceTimeGrid grid;
    CoefficientSet coeffs;
    Field phi;
    SpaceTimeField v;
    SpaceTimeFunction phi_fn;
    SpaceTimeFunction v_fn;
    std::string terminal_family;
    std::string obstacle_family;

    bool has_obstacle() const { return obstacle_family != "none"; }
};

/**
 * Problem block: {"grid": .., "coefficients": .., "terminal": {"family": ..},
 * "obstacle": {"family": ..}}. "obstacle" defaults to "none".
 *
 * Throws ConfigError when v(T, x) > Phi(x) at some node (the message lists
 * the offending nodes) or when Phi or v is not finite.
 */
ObstacleProblem build_problem(const nlohmann::json& block);

struct LipschitzProbe {
    std::string coefficient;  ///< "f", "g" or "h"
    std::string variable;     ///< "y", "z" or "joint"
    double declared = 0.0;    ///< constant the probe is compared against
    double empirical = 0.0;   ///< largest observed ratio
    bool pass = true;
};

struct HypothesisReport {
    double contraction_margin = 0.0;
    bool contraction_pass = false;
    std::vector<LipschitzProbe> probes;
    bool zero_coefficients_finite = true;
    std::size_t probe_count = 0;
    std::uint64_t seed = 0;

    bool pass() const;
    nlohmann::json to_json() const;
};

/**
 * Contraction margin 1/2 - alpha - beta^2/2, sampled Lipschitz ratios and
 * finiteness of f(.,.,0,0), g(.,.,0,0), h(.,.,0,0) on the grid nodes.
 *
 * An empirical ratio above the declared constant times (1 + 1e-9) throws
 * HypothesisViolation naming the coefficient; a nonpositive margin is only
 * reported. Deterministic in (coeffs, grid, probe_count, seed).
 */
HypothesisReport validate_hypotheses(const CoefficientSet& coeffs, const SpaceTimeGrid& grid,
                                     std::size_t probe_count, std::uint64_t seed);

/// Discrete norms. `mask` (optional, one entry per node) restricts the spatial sums.
namespace norms {

double l2(const SpaceTimeGrid& grid, std::span<const double> u, const std::vector<char>* mask = nullptr);
double h1_seminorm(const SpaceTimeGrid& grid, std::span<const double> u,
                   const std::vector<char>* mask = nullptr);
/// (sum_{k<nt} dt ||u_k||_2^2)^{1/2}
double l2_2(const SpaceTimeGrid& grid, const SpaceTimeField& u, const std::vector<char>* mask = nullptr);
/// sup_k ||u_k||_2 + (sum_{k<nt} dt |u_k|_{H1}^2)^{1/2}
double t_norm(const SpaceTimeGrid& grid, const SpaceTimeField& u, const std::vector<char>* mask = nullptr);

}  // namespace norms

struct DiscreteNorms {
    double l2_sup = 0.0;        ///< sup_k ||u_k||_2
    double l2_2 = 0.0;          ///< space-time L2 norm
    double h1_integrated = 0.0; ///< (sum_k dt |u_k|_{H1}^2)^{1/2}
    double t_norm = 0.0;        ///< l2_sup + h1_integrated

    static DiscreteNorms of(const SpaceTimeGrid& grid, const SpaceTimeField& u,
                            const std::vector<char>* mask = nullptr);
};

}  // namespace ospde
