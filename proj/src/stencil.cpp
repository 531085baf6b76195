#include "ospde/stencil.hpp"

#include <cmath>

#include "ospde/errors.hpp"

namespace ospde::stencil {

namespace {

void check_size(std::span<const double> s, std::size_t expected, const char* what) {
    if (s.size() != expected) throw ShapeError(std::string(what) + ": unexpected field size");
}

}  // namespace

void laplacian(const SpaceTimeGrid& grid, std::span<const double> u, std::span<double> out) {
    check_size(u, grid.nodes(), "laplacian");
    check_size(std::span<const double>(out.data(), out.size()), grid.nodes(), "laplacian");
    const std::size_t nx = grid.nodes_along(0);
    const double ix2 = 1.0 / (grid.dx(0) * grid.dx(0));
    if (grid.dim() == 1) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double left = i > 0 ? u[i - 1] : 0.0;
            const double right = i + 1 < nx ? u[i + 1] : 0.0;
            out[i] = (left - 2.0 * u[i] + right) * ix2;
        }
        return;
    }
    const std::size_t ny = grid.nodes_along(1);
    const double iy2 = 1.0 / (grid.dx(1) * grid.dx(1));
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t n = grid.flat(i, j);
            const double left = i > 0 ? u[n - 1] : 0.0;
            const double right = i + 1 < nx ? u[n + 1] : 0.0;
            const double down = j > 0 ? u[n - nx] : 0.0;
            const double up = j + 1 < ny ? u[n + nx] : 0.0;
            out[n] = (left - 2.0 * u[n] + right) * ix2 + (down - 2.0 * u[n] + up) * iy2;
        }
    }
}

void gradient(const SpaceTimeGrid& grid, std::span<const double> u, std::span<double> out) {
    const int d = grid.dim();
    check_size(u, grid.nodes(), "gradient");
    if (out.size() != grid.nodes() * static_cast<std::size_t>(d)) throw ShapeError("gradient: output size");
    const std::size_t nx = grid.nodes_along(0);
    const std::size_t ny = d == 2 ? grid.nodes_along(1) : 1;
    const double hx = 0.5 / grid.dx(0);
    const double hy = d == 2 ? 0.5 / grid.dx(1) : 0.0;
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t n = grid.flat(i, j);
            const double left = i > 0 ? u[n - 1] : 0.0;
            const double right = i + 1 < nx ? u[n + 1] : 0.0;
            out[n * d] = (right - left) * hx;
            if (d == 2) {
                const double down = j > 0 ? u[n - nx] : 0.0;
                const double up = j + 1 < ny ? u[n + nx] : 0.0;
                out[n * d + 1] = (up - down) * hy;
            }
        }
    }
}

void divergence(const SpaceTimeGrid& grid, std::span<const double> g, std::span<double> out) {
    const int d = grid.dim();
    if (g.size() != grid.nodes() * static_cast<std::size_t>(d)) throw ShapeError("divergence: input size");
    check_size(std::span<const double>(out.data(), out.size()), grid.nodes(), "divergence");
    const std::size_t nx = grid.nodes_along(0);
    const std::size_t ny = d == 2 ? grid.nodes_along(1) : 1;
    for (std::size_t j = 0; j < ny; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const std::size_t n = grid.flat(i, j);
            double div;
            if (i == 0) {
                div = (g[(n + 1) * d] - g[n * d]) / grid.dx(0);
            } else if (i + 1 == nx) {
                div = (g[n * d] - g[(n - 1) * d]) / grid.dx(0);
            } else {
                div = (g[(n + 1) * d] - g[(n - 1) * d]) * (0.5 / grid.dx(0));
            }
            if (d == 2) {
                if (j == 0) {
                    div += (g[(n + nx) * d + 1] - g[n * d + 1]) / grid.dx(1);
                } else if (j + 1 == ny) {
                    div += (g[n * d + 1] - g[(n - nx) * d + 1]) / grid.dx(1);
                } else {
                    div += (g[(n + nx) * d + 1] - g[(n - nx) * d + 1]) * (0.5 / grid.dx(1));
                }
            }
            out[n] = div;
        }
    }
}

void solve_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, std::span<double> rhs) {
    const std::size_t n = diag.size();
    if (lower.size() != n || upper.size() != n || rhs.size() != n) throw ShapeError("tridiagonal: sizes");
    std::vector<double> c(n);
    double beta = diag[0];
    if (beta == 0.0) throw NumericalError("tridiagonal: zero pivot at row 0");
    rhs[0] /= beta;
    for (std::size_t i = 1; i < n; ++i) {
        c[i] = upper[i - 1] / beta;
        beta = diag[i] - lower[i] * c[i];
        if (beta == 0.0 || !std::isfinite(beta)) {
            throw NumericalError("tridiagonal: singular pivot at row " + std::to_string(i));
        }
        rhs[i] = (rhs[i] - lower[i] * rhs[i - 1]) / beta;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= c[i + 1] * rhs[i + 1];
}

ImplicitOperator::ImplicitOperator(const SpaceTimeGrid& grid, double tau, std::size_t adi_sweeps)
    : grid_(&grid), tau_(tau), sweeps_(adi_sweeps) {
    if (!(tau >= 0.0)) throw DomainError("implicit operator: tau must be >= 0");
    if (sweeps_ == 0) throw ConfigError("implicit operator: at least one relaxation sweep required");
}

void ImplicitOperator::apply(std::span<const double> u, std::span<const double> reaction,
                             std::span<double> out) const {
    laplacian(*grid_, u, out);
    for (std::size_t n = 0; n < u.size(); ++n) {
        const double r = reaction.empty() ? 0.0 : reaction[n];
        out[n] = (1.0 + r) * u[n] - 0.5 * tau_ * out[n];
    }
}

void ImplicitOperator::solve(std::span<const double> rhs, std::span<const double> reaction,
                             std::span<double> out, bool warm_start) const {
    const SpaceTimeGrid& grid = *grid_;
    const std::size_t nodes = grid.nodes();
    if (rhs.size() != nodes || out.size() != nodes) throw ShapeError("implicit solve: field size");
    if (!reaction.empty() && reaction.size() != nodes) throw ShapeError("implicit solve: reaction size");
    const std::size_t nx = grid.nodes_along(0);
    const double cx = 0.5 * tau_ / (grid.dx(0) * grid.dx(0));
    auto r_at = [&](std::size_t n) { return reaction.empty() ? 0.0 : reaction[n]; };

    if (grid.dim() == 1) {
        std::vector<double> lo(nx, -cx), di(nx), up(nx, -cx);
        for (std::size_t i = 0; i < nx; ++i) {
            di[i] = 1.0 + r_at(i) + 2.0 * cx;
            out[i] = rhs[i];
        }
        solve_tridiagonal(lo, di, up, out);
        return;
    }

    const std::size_t ny = grid.nodes_along(1);
    const double cy = 0.5 * tau_ / (grid.dx(1) * grid.dx(1));
    if (!warm_start) {
        for (std::size_t n = 0; n < nodes; ++n) out[n] = rhs[n] / (1.0 + r_at(n) + 2.0 * cx + 2.0 * cy);
    }
    std::vector<double> lo, di, up, line;
    for (std::size_t sweep = 0; sweep < sweeps_; ++sweep) {
        lo.assign(nx, -cx);
        up.assign(nx, -cx);
        di.resize(nx);
        line.resize(nx);
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nx; ++i) {
                const std::size_t n = grid.flat(i, j);
                const double down = j > 0 ? out[n - nx] : 0.0;
                const double upv = j + 1 < ny ? out[n + nx] : 0.0;
                di[i] = 1.0 + r_at(n) + 2.0 * cx + 2.0 * cy;
                line[i] = rhs[n] + cy * (down + upv);
            }
            solve_tridiagonal(lo, di, up, line);
            for (std::size_t i = 0; i < nx; ++i) out[grid.flat(i, j)] = line[i];
        }
        lo.assign(ny, -cy);
        up.assign(ny, -cy);
        di.resize(ny);
        line.resize(ny);
        for (std::size_t i = 0; i < nx; ++i) {
            for (std::size_t j = 0; j < ny; ++j) {
                const std::size_t n = grid.flat(i, j);
                const double left = i > 0 ? out[n - 1] : 0.0;
                const double right = i + 1 < nx ? out[n + 1] : 0.0;
                di[j] = 1.0 + r_at(n) + 2.0 * cx + 2.0 * cy;
                line[j] = rhs[n] + cx * (left + right);
            }
            solve_tridiagonal(lo, di, up, line);
            for (std::size_t j = 0; j < ny; ++j) out[grid.flat(i, j)] = line[j];
        }
    }
}

}  // namespace ospde::stencil
