#pragma once

#include <functional>
#include <span>
#include <string>

#include <json.hpp>

#include "ospde/grid.hpp"

namespace ospde {

/// f(t, x, y, z) -> scalar
using ScalarCoefficient = std::function<double(double t, const Point& x, double y, const Vec2& z)>;
/// g(t, x, y, z) -> R^d, h(t, x, y, z) -> R^{d1}; written into `out`.
using VectorCoefficient =
    std::function<void(double t, const Point& x, double y, const Vec2& z, std::span<double> out)>;
/// Deterministic space-time function, used for the terminal value and the obstacle.
using SpaceTimeFunction = std::function<double(double t, const Point& x)>;

/**
 * Coefficients of the quasilinear equation together with the declared
 * constants (C, alpha, beta):
 *   |f(y,z) - f(y',z')|  <= C (|y-y'| + |z-z'|)
 *   |g(y,z) - g(y',z')|  <= C |y-y'| + alpha |z-z'|
 *   |h(y,z) - h(y',z')|  <= C |y-y'| + beta  |z-z'|
 */
struct CoefficientSet {
    ScalarCoefficient f;
    VectorCoefficient g;
    VectorCoefficient h;
    double lip_C = 0.0;
    double lip_alpha = 0.0;
    double lip_beta = 0.0;
    int dim = 1;
    int d1 = 1;

    std::string f_family = "zero";
    std::string g_family = "zero";
    std::string h_family = "zero";

    bool g_is_zero() const { return g_family == "zero"; }
    bool h_is_zero() const { return h_family == "zero"; }
    /// 1/2 - alpha - beta^2 / 2; must be positive.
    double contraction_margin() const { return 0.5 - lip_alpha - 0.5 * lip_beta * lip_beta; }
};

/**
 * Registry of built-in coefficient families.
 *
 * `block` has the form
 *   { "f": {"family": "...", ...params}, "g": {...}, "h": {...},
 *     "noise_dim": 1, "lipschitz": {"C": .., "alpha": .., "beta": ..} }
 * Missing f/g/h default to "zero". Unknown families, parameters or keys
 * throw ConfigError.
 */
CoefficientSet make_coefficients(const nlohmann::json& block, int dim);

/// Registry for the terminal value Phi and the obstacle v.
SpaceTimeFunction make_space_time_function(const nlohmann::json& spec, int dim, const std::string& role);

/// Obstacle value used for "no obstacle".
inline constexpr double kNoObstacle = -1.0e6;

}  // namespace ospde
