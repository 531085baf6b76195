#include "ospde/kernel.hpp"

#include <cmath>
#include <numbers>

#include "ospde/errors.hpp"
#include "ospde/stencil.hpp"

namespace ospde::kernel {

namespace {

// P(lo < N(0,1) < hi), accurate in both tails.
double normal_mass(double lo, double hi) {
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    if (lo > 0.0) return 0.5 * (std::erfc(lo * inv_sqrt2) - std::erfc(hi * inv_sqrt2));
    if (hi < 0.0) return 0.5 * (std::erfc(-hi * inv_sqrt2) - std::erfc(-lo * inv_sqrt2));
    return 1.0 - 0.5 * std::erfc(-lo * inv_sqrt2) - 0.5 * std::erfc(hi * inv_sqrt2);
}

double gaussian_pdf(double r, double sigma) {
    const double z = r / sigma;
    return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
}

// int_a^b q_t(x - y) * (y - a) / (b - a) dy
double rising_weight(double x, double a, double b, double sigma) {
    const double i0 = normal_mass((a - x) / sigma, (b - x) / sigma);
    const double i1 = sigma * sigma * (gaussian_pdf(a - x, sigma) - gaussian_pdf(b - x, sigma));
    return (i1 + (x - a) * i0) / (b - a);
}

// int_b^c q_t(x - y) * (c - y) / (c - b) dy
double falling_weight(double x, double b, double c, double sigma) {
    const double i0 = normal_mass((b - x) / sigma, (c - x) / sigma);
    const double i1 = sigma * sigma * (gaussian_pdf(b - x, sigma) - gaussian_pdf(c - x, sigma));
    return ((c - x) * i0 - i1) / (c - b);
}

// Dense nodes x nodes matrix of hat-function weights along one axis.
std::vector<double> axis_weights(const Axis& axis, double t) {
    const std::size_t n = axis.nodes;
    const double h = axis.spacing();
    const double sigma = std::sqrt(t);
    const double cutoff = 40.0 * sigma + 2.0 * h;
    std::vector<double> w(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double x = axis.coordinate(i);
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = axis.coordinate(j);
            if (std::abs(x - xj) > cutoff) continue;
            const double rise = rising_weight(x, xj - h, xj, sigma);
            const double fall = falling_weight(x, xj, xj + h, sigma);
            w[i * n + j] = std::max(0.0, rise) + std::max(0.0, fall);
        }
    }
    return w;
}

double segment_factor(double x) {
    // (1 - e^{-x}) / x - e^{-x}
    if (x < 1e-3) return x / 2.0 - x * x / 3.0 + x * x * x / 8.0 - x * x * x * x / 30.0;
    return -std::expm1(-x) / x - std::exp(-x);
}

}  // namespace

double heat_kernel_density(const HeatKernelParams& p, std::span<const double> x) {
    if (!(p.t > 0.0)) throw DomainError("heat_kernel_density: t must be > 0");
    if (p.dim != 1 && p.dim != 2) throw DomainError("heat_kernel_density: dim must be 1 or 2");
    if (x.size() != static_cast<std::size_t>(p.dim)) throw ShapeError("heat_kernel_density: point dimension");
    double r2 = 0.0;
    for (double c : x) r2 += c * c;
    return std::pow(2.0 * std::numbers::pi * p.t, -0.5 * p.dim) * std::exp(-r2 / (2.0 * p.t));
}

Field apply_semigroup(std::span<const double> field, double t, const SpaceTimeGrid& grid) {
    if (t < 0.0) throw DomainError("apply_semigroup: t must be >= 0");
    if (field.size() != grid.nodes()) throw ShapeError("apply_semigroup: field size");
    Field out(field.begin(), field.end());
    if (t == 0.0) return out;

    const std::size_t nx = grid.nodes_along(0);
    const std::size_t ny = grid.dim() == 2 ? grid.nodes_along(1) : 1;
    {
        const auto w = axis_weights(grid.axis(0), t);
        std::vector<double> line(nx);
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nx; ++i) {
                double acc = 0.0;
                for (std::size_t l = 0; l < nx; ++l) acc += w[i * nx + l] * out[grid.flat(l, j)];
                line[i] = acc;
            }
            for (std::size_t i = 0; i < nx; ++i) out[grid.flat(i, j)] = line[i];
        }
    }
    if (grid.dim() == 2) {
        const auto w = axis_weights(grid.axis(1), t);
        std::vector<double> line(ny);
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                double acc = 0.0;
                for (std::size_t l = 0; l < ny; ++l) acc += w[j * ny + l] * out[grid.flat(i, l)];
                line[j] = acc;
            }
            for (std::size_t j = 0; j < ny; ++j) out[grid.flat(i, j)] = line[j];
        }
    }
    return out;
}

SpaceTimeField apply_resolvent(const SpaceTimeField& psi, double alpha, const SpaceTimeGrid& grid) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError("apply_resolvent: alpha must be >= 0");
    if (psi.slices() != grid.time_steps() + 1 || psi.nodes() != grid.nodes() || psi.width() != 1) {
        throw ShapeError("apply_resolvent: field must be scalar on the full space-time mesh");
    }
    if (!psi.all_finite()) throw DomainError("apply_resolvent: field has non-finite values");
    const double dt = grid.dt();
    const stencil::ImplicitOperator op(grid, dt);
    const std::vector<double> reaction(grid.nodes(), alpha * dt);

    auto out = SpaceTimeField::on(grid);
    std::vector<double> rhs(grid.nodes());
    for (std::size_t k = grid.time_steps(); k-- > 0;) {
        const auto next = out.slice(k + 1);
        const auto src = psi.slice(k);
        for (std::size_t n = 0; n < rhs.size(); ++n) rhs[n] = next[n] + dt * src[n];
        op.solve(rhs, reaction, out.slice(k));
    }
    return out;
}

ApproximatePotential approximate_potential(const SpaceTimeField& u, double n, const SpaceTimeGrid& grid) {
    if (!(n >= 1.0)) throw DomainError("approximate_potential: level n must be >= 1");
    ApproximatePotential result{apply_resolvent(u, n, grid), SpaceTimeField::on(grid)};
    auto un = result.u_n.data();
    auto fn = result.f_n.data();
    const auto src = u.data();
    for (std::size_t i = 0; i < un.size(); ++i) {
        un[i] *= n;
        fn[i] = n * (src[i] - un[i]);
    }
    return result;
}

double exp_average(std::span<const double> times, std::span<const double> values, double lambda) {
    if (values.empty()) throw DomainError("exp_average: empty series");
    if (times.size() != values.size()) throw ShapeError("exp_average: times and values differ in length");
    if (!(lambda > 0.0)) throw DomainError("exp_average: lambda must be > 0");
    double acc = values.back();
    for (std::size_t i = values.size() - 1; i-- > 0;) {
        const double h = times[i + 1] - times[i];
        if (!(h > 0.0)) throw DomainError("exp_average: times must be strictly increasing");
        const double x = lambda * h;
        const double seg = values[i] * -std::expm1(-x) + (values[i + 1] - values[i]) * segment_factor(x);
        acc = seg + std::exp(-x) * acc;
    }
    return acc;
}

double exp_average(std::span<const double> values, double dt, double lambda) {
    if (values.empty()) throw DomainError("exp_average: empty series");
    return exp_average_profile(values, dt, lambda).front();
}

std::vector<double> exp_average_profile(std::span<const double> values, double dt, double lambda) {
    if (values.empty()) throw DomainError("exp_average: empty series");
    if (!(lambda > 0.0)) throw DomainError("exp_average: lambda must be > 0");
    if (!(dt > 0.0)) throw DomainError("exp_average: dt must be > 0");
    const double x = lambda * dt;
    const double keep = std::exp(-x);
    const double mass = -std::expm1(-x);
    const double slope = segment_factor(x);
    std::vector<double> out(values.size());
    out.back() = values.back();
    for (std::size_t i = values.size() - 1; i-- > 0;) {
        out[i] = values[i] * mass + (values[i + 1] - values[i]) * slope + keep * out[i + 1];
    }
    return out;
}

}  // namespace ospde::kernel
