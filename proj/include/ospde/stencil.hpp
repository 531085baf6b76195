#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ospde/grid.hpp"

namespace ospde::stencil {

/// 3-point (1D) or 5-point (2D) Laplacian with zero ghost values.
void laplacian(const SpaceTimeGrid& grid, std::span<const double> u, std::span<double> out);

/// Central-difference gradient with zero ghost values; `out` holds dim values per node.
void gradient(const SpaceTimeGrid& grid, std::span<const double> u, std::span<double> out);

/// Central-difference divergence of a vector field with dim values per node.
/// Ghost values are linearly extrapolated, i.e. one-sided differences on the faces.
void divergence(const SpaceTimeGrid& grid, std::span<const double> g, std::span<double> out);

/// Solves a tridiagonal system in place. `lower[0]` and `upper[n-1]` are ignored.
void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs_inout);

/**
 * The implicit heat operator M = (1 + r_i) I - tau * (1/2) Delta_h with a
 * per-node nonnegative reaction coefficient r_i (already scaled by tau).
 *
 * 1D systems are solved directly. 2D systems use alternating x-line and
 * y-line relaxation sweeps with a fixed sweep count, so results are
 * deterministic and independent of any tolerance.
 */
class ImplicitOperator {
public:
    ImplicitOperator(const SpaceTimeGrid& grid, double tau, std::size_t adi_sweeps = 24);

    double tau() const { return tau_; }

    /// Solve M u = rhs. An empty `reaction` means r = 0. With `warm_start` the
    /// current content of `out` seeds the 2D relaxation.
    void solve(std::span<const double> rhs, std::span<const double> reaction, std::span<double> out,
               bool warm_start = false) const;

    /// out = M u.
    void apply(std::span<const double> u, std::span<const double> reaction, std::span<double> out) const;

private:
    const SpaceTimeGrid* grid_;
    double tau_;
    std::size_t sweeps_;
};

}  // namespace ospde::stencil
