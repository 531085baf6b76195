#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include "ospde/grid.hpp"

namespace ospde {

/// Increments dB_k ~ N(0, dt I) of the backward noise, k = 0..nt-1, d1 values each.
struct BackwardNoisePath {
    std::uint64_t seed = 0;
    std::size_t nt = 0;
    std::size_t d1 = 1;
    double dt = 0.0;
    std::vector<double> increments;

    std::span<const double> increment(std::size_t k) const { return {increments.data() + k * d1, d1}; }
    /// B_{t_k} - B_0, component c.
    double value(std::size_t k, std::size_t c) const;
};

/// Pure function of (seed, nt, d1, dt).
BackwardNoisePath sample_backward_noise(std::uint64_t seed, std::size_t nt, std::size_t d1, double dt);

/// Positions W_k, k = 0..nt, and increments of one forward path.
struct ForwardPath {
    std::size_t index = 0;
    int dim = 1;
    std::vector<double> positions;   ///< (nt+1) * dim
    std::vector<double> increments;  ///< nt * dim

    Point at(std::size_t k) const {
        Point p{};
        for (int a = 0; a < dim; ++a) p[a] = positions[k * dim + a];
        return p;
    }
    std::span<const double> increment(std::size_t k) const {
        return {increments.data() + k * dim, static_cast<std::size_t>(dim)};
    }
};

/**
 * Batch of M forward Brownian paths started uniformly on the interior core.
 * Path m is generated on demand from its own stream, so it is identical no
 * matter which worker produces it or in what order.
 */
class ForwardPathBatch {
public:
    ForwardPathBatch(std::uint64_t seed, std::size_t paths, const SpaceTimeGrid& grid);

    std::uint64_t seed() const { return seed_; }
    std::size_t size() const { return paths_; }
    std::size_t time_steps() const { return nt_; }
    int dim() const { return dim_; }
    /// Volume of the sampling region; multiplies every mean to estimate E^m.
    double weight() const { return core_.volume(); }
    const Box& sampling_region() const { return core_; }

    ForwardPath path(std::size_t m) const;

private:
    std::uint64_t seed_;
    std::size_t paths_;
    std::size_t nt_;
    double dt_;
    int dim_;
    Box core_;
};

/**
 * Discrete stochastic integrals. `values` holds nt+1 mesh samples with
 * `width` components each, `increments` holds nt increments of the same
 * width. Components are contracted with a dot product.
 *
 *   forward:   sum_k values_k     . dW_k
 *   backward:  sum_k values_{k+1} . dB_k
 *   symmetric: sum_k (values_k + values_{k+1}) . dW_k
 *
 * A length mismatch throws ShapeError.
 */
double forward_ito_integral(std::span<const double> values, std::span<const double> increments,
                            std::size_t width = 1);
double backward_ito_integral(std::span<const double> values, std::span<const double> increments,
                             std::size_t width = 1);
double symmetric_integral(std::span<const double> values, std::span<const double> increments,
                          std::size_t width = 1);

/// CSV with columns path,k,t,W... ,B... for the selected paths.
void write_paths_csv(std::ostream& out, const ForwardPathBatch& batch, std::span<const std::size_t> indices,
                     const BackwardNoisePath& noise, double dt);

}  // namespace ospde
