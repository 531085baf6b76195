#include "ospde/solver.hpp"

#include <cmath>
#include <sstream>

#include <spdlog/spdlog.h>

#include "ospde/errors.hpp"
#include "ospde/parallel.hpp"
#include "ospde/stencil.hpp"

namespace ospde {

namespace {

void check_noise(const ObstacleProblem& problem, const BackwardNoisePath& noise) {
    const auto& grid = problem.grid;
    if (noise.nt != grid.time_steps()) throw ShapeError("noise has a different number of steps than the grid");
    if (noise.d1 != static_cast<std::size_t>(problem.coeffs.d1)) {
        throw ShapeError("noise dimension does not match coefficients.noise_dim");
    }
    if (std::abs(noise.dt - grid.dt()) > 1e-12 * grid.dt()) throw ShapeError("noise time step differs from the grid");
}

// u_{k+1} + dt (f + div_h g) + h . dB_k, coefficients frozen at u_{k+1}.
void explicit_part(std::span<const double> u_next, std::size_t k, const ObstacleProblem& problem,
                   const BackwardNoisePath* noise, std::span<double> rhs) {
    const auto& grid = problem.grid;
    const auto& c = problem.coeffs;
    const std::size_t d = static_cast<std::size_t>(grid.dim());
    const std::size_t nodes = grid.nodes();
    const double dt = grid.dt();
    const double t = grid.time(k + 1);

    std::vector<double> grad(nodes * d);
    stencil::gradient(grid, u_next, grad);
    auto z_at = [&](std::size_t n) {
        Vec2 z{};
        for (std::size_t a = 0; a < d; ++a) z[a] = grad[n * d + a];
        return z;
    };

    for (std::size_t n = 0; n < nodes; ++n) rhs[n] = u_next[n] + dt * c.f(t, grid.point(n), u_next[n], z_at(n));

    if (!c.g_is_zero()) {
        std::vector<double> g(nodes * d), div(nodes);
        for (std::size_t n = 0; n < nodes; ++n) {
            c.g(t, grid.point(n), u_next[n], z_at(n), std::span<double>(g.data() + n * d, d));
        }
        stencil::divergence(grid, g, div);
        for (std::size_t n = 0; n < nodes; ++n) rhs[n] += dt * div[n];
    }
    if (noise && !c.h_is_zero()) {
        const auto db = noise->increment(k);
        std::vector<double> h(noise->d1);
        for (std::size_t n = 0; n < nodes; ++n) {
            c.h(t, grid.point(n), u_next[n], z_at(n), h);
            double s = 0.0;
            for (std::size_t i = 0; i < h.size(); ++i) s += h[i] * db[i];
            rhs[n] += s;
        }
    }
}

}  // namespace

Field step_backward(std::span<const double> u_next, std::size_t k, double n, const ObstacleProblem& problem,
                    const BackwardNoisePath& noise, const SolverOptions& options, std::size_t* policy_iterations) {
    const auto& grid = problem.grid;
    if (k >= grid.time_steps()) throw DomainError("step_backward: k out of range");
    if (u_next.size() != grid.nodes()) throw ShapeError("step_backward: field size");
    if (!(n >= 0.0) || !std::isfinite(n)) throw DomainError("step_backward: level must be >= 0");
    check_noise(problem, noise);

    const std::size_t nodes = grid.nodes();
    const double dt = grid.dt();
    std::vector<double> rhs(nodes);
    explicit_part(u_next, k, problem, &noise, rhs);

    const stencil::ImplicitOperator op(grid, dt, options.adi_sweeps);
    Field u(nodes);
    const auto v = problem.v.slice(k);
    std::size_t iterations = 1;

    if (n == 0.0) {
        op.solve(rhs, {}, u);
    } else {
        const double pen = dt * n;
        std::vector<char> active(nodes);
        for (std::size_t i = 0; i < nodes; ++i) active[i] = u_next[i] < v[i];
        std::vector<double> reaction(nodes), rhs_a(nodes);
        for (iterations = 1;; ++iterations) {
            for (std::size_t i = 0; i < nodes; ++i) {
                reaction[i] = active[i] ? pen : 0.0;
                rhs_a[i] = rhs[i] + (active[i] ? pen * v[i] : 0.0);
            }
            op.solve(rhs_a, reaction, u, iterations > 1);
            bool changed = false;
            for (std::size_t i = 0; i < nodes; ++i) {
                const char now = u[i] < v[i];
                if (now != active[i]) {
                    active[i] = now;
                    changed = true;
                }
            }
            if (!changed) break;
            if (iterations >= options.max_policy_iterations) {
                spdlog::warn("step {}: active set not settled after {} passes", k, iterations);
                break;
            }
        }
    }
    for (std::size_t i = 0; i < nodes; ++i) {
        if (!std::isfinite(u[i])) {
            throw NumericalError("non-finite value at step k=" + std::to_string(k) + ", node " + std::to_string(i) +
                                 " (level n=" + std::to_string(n) + ")");
        }
    }
    if (policy_iterations) *policy_iterations = iterations;
    return u;
}

PenalizedSolution solve_penalized(const ObstacleProblem& problem, double n, const BackwardNoisePath& noise,
                                  const SolverOptions& options) {
    const auto& grid = problem.grid;
    check_noise(problem, noise);
    spdlog::debug("penalized solve: n={} dt*n={}", n, grid.dt() * n);

    PenalizedSolution sol;
    sol.level = n;
    sol.noise_seed = noise.seed;
    sol.u = SpaceTimeField::on(grid);
    sol.grad = SpaceTimeField::on(grid, static_cast<std::size_t>(grid.dim()));
    sol.rho = SpaceTimeField::on(grid);

    const std::size_t nt = grid.time_steps();
    std::copy(problem.phi.begin(), problem.phi.end(), sol.u.slice(nt).begin());
    for (std::size_t k = nt; k-- > 0;) {
        std::size_t its = 0;
        const Field uk = step_backward(sol.u.slice(k + 1), k, n, problem, noise, options, &its);
        std::copy(uk.begin(), uk.end(), sol.u.slice(k).begin());
        sol.max_policy_iterations = std::max(sol.max_policy_iterations, its);
    }
    for (std::size_t k = 0; k <= nt; ++k) {
        stencil::gradient(grid, sol.u.slice(k), sol.grad.slice(k));
        const auto u = sol.u.slice(k);
        const auto v = problem.v.slice(k);
        auto rho = sol.rho.slice(k);
        for (std::size_t i = 0; i < u.size(); ++i) rho[i] = n * std::max(v[i] - u[i], 0.0);
    }
    return sol;
}

DiscreteRegularMeasure extract_measure(const PenalizedSolution& sol, const ObstacleProblem& problem) {
    const auto& grid = problem.grid;
    DiscreteRegularMeasure m;
    m.masses = SpaceTimeField::on(grid);
    m.support.assign(m.masses.data().size(), 0);
    const double cell = grid.dt() * grid.cell_volume();
    std::vector<double> per_slice(grid.time_steps(), 0.0);
    for (std::size_t k = 0; k < grid.time_steps(); ++k) {
        double slice_mass = 0.0;
        for (std::size_t i = 0; i < grid.nodes(); ++i) {
            const double mass = sol.rho.at(k, i) * cell;
            m.masses.at(k, i) = mass;
            m.support[k * grid.nodes() + i] = mass > 0.0;
            slice_mass += mass;
            m.complementarity_defect += mass * std::max(sol.u.at(k, i) - problem.v.at(k, i), 0.0);
        }
        per_slice[k] = slice_mass;
    }
    m.total = pairwise_sum(per_slice);
    return m;
}

nlohmann::json SweepReport::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& l : levels) {
        rows.push_back({{"n", l.n},
                        {"monotonicity_defect", l.monotonicity_defect},
                        {"cauchy_h1", l.cauchy_h1},
                        {"cauchy_t_norm", l.cauchy_t_norm},
                        {"obstacle_defect", l.obstacle_defect},
                        {"mass", l.mass},
                        {"complementarity_vs_limit", l.complementarity_vs_limit}});
    }
    return {{"levels", rows},
            {"max_monotonicity_defect", max_monotonicity_defect},
            {"tolerance", tolerance},
            {"monotone", monotone}};
}

SweepResult penalization_sweep(const ObstacleProblem& problem, const std::vector<double>& schedule,
                               const BackwardNoisePath& noise, double tolerance, const SolverOptions& options) {
    if (schedule.empty()) throw ConfigError("sweep: empty schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] >= 0.0)) throw ConfigError("sweep: levels must be >= 0");
        if (i > 0 && !(schedule[i] > schedule[i - 1])) throw ConfigError("sweep: schedule must be strictly increasing");
    }
    const auto& grid = problem.grid;
    SweepResult result;
    result.solutions.resize(schedule.size());
    parallel_for(schedule.size(), [&](std::size_t i) {
        result.solutions[i] = solve_penalized(problem, schedule[i], noise, options);
    });

    const auto core = grid.core_mask();
    const auto& limit = result.solutions.back().u;
    auto& rep = result.report;
    rep.tolerance = tolerance;
    rep.levels.resize(schedule.size());
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        const auto& sol = result.solutions[i];
        SweepLevel& lvl = rep.levels[i];
        lvl.n = schedule[i];
        const auto meas = extract_measure(sol, problem);
        lvl.mass = meas.total;
        for (std::size_t k = 0; k <= grid.time_steps(); ++k) {
            for (std::size_t j = 0; j < grid.nodes(); ++j) {
                const double v = problem.v.at(k, j);
                if (core[j]) lvl.obstacle_defect = std::max(lvl.obstacle_defect, v - sol.u.at(k, j));
                lvl.complementarity_vs_limit += meas.masses.at(k, j) * std::max(limit.at(k, j) - v, 0.0);
            }
        }
        lvl.obstacle_defect = std::max(lvl.obstacle_defect, 0.0);
        if (i + 1 < schedule.size()) {
            const auto& next = result.solutions[i + 1].u;
            SpaceTimeField diff = SpaceTimeField::on(grid);
            auto dd = diff.data();
            const auto a = sol.u.data();
            const auto b = next.data();
            for (std::size_t q = 0; q < dd.size(); ++q) {
                dd[q] = b[q] - a[q];
                lvl.monotonicity_defect = std::max(lvl.monotonicity_defect, a[q] - b[q]);
            }
            const auto norm = DiscreteNorms::of(grid, diff, &core);
            lvl.cauchy_h1 = norm.h1_integrated;
            lvl.cauchy_t_norm = norm.t_norm;
        }
        rep.max_monotonicity_defect = std::max(rep.max_monotonicity_defect, lvl.monotonicity_defect);
    }
    rep.monotone = rep.max_monotonicity_defect <= tolerance;
    if (!rep.monotone) {
        spdlog::warn("sweep: monotonicity defect {} exceeds tolerance {}", rep.max_monotonicity_defect, tolerance);
    }
    return result;
}

PsorResult psor_oracle(const ObstacleProblem& problem, const PsorOptions& options) {
    if (!problem.coeffs.g_is_zero() || !problem.coeffs.h_is_zero()) {
        throw ConfigError("psor_oracle: requires g = 0 and h = 0");
    }
    if (!(options.omega > 0.0 && options.omega < 2.0)) throw ConfigError("psor_oracle: omega must lie in (0, 2)");
    const auto& grid = problem.grid;
    const std::size_t nodes = grid.nodes();
    const std::size_t nx = grid.nodes_along(0);
    const std::size_t ny = grid.dim() == 2 ? grid.nodes_along(1) : 1;
    const double dt = grid.dt();
    const double cx = 0.5 * dt / (grid.dx(0) * grid.dx(0));
    const double cy = grid.dim() == 2 ? 0.5 * dt / (grid.dx(1) * grid.dx(1)) : 0.0;
    const double diag = 1.0 + 2.0 * cx + 2.0 * cy;

    PsorResult res;
    res.u = SpaceTimeField::on(grid);
    res.iterations.assign(grid.time_steps(), 0);
    const std::size_t nt = grid.time_steps();
    std::copy(problem.phi.begin(), problem.phi.end(), res.u.slice(nt).begin());

    std::vector<double> b(nodes);
    auto offdiag = [&](std::span<const double> u, std::size_t n) {
        const auto ij = grid.multi_index(n);
        double s = 0.0;
        if (ij[0] > 0) s += cx * u[n - 1];
        if (ij[0] + 1 < nx) s += cx * u[n + 1];
        if (ny > 1) {
            if (ij[1] > 0) s += cy * u[n - nx];
            if (ij[1] + 1 < ny) s += cy * u[n + nx];
        }
        return s;
    };

    for (std::size_t k = nt; k-- > 0;) {
        explicit_part(res.u.slice(k + 1), k, problem, nullptr, b);
        const auto v = problem.v.slice(k);
        auto u = res.u.slice(k);
        const auto next = res.u.slice(k + 1);
        for (std::size_t n = 0; n < nodes; ++n) u[n] = std::max(next[n], v[n]);

        std::vector<double> history;
        double residual = 0.0;
        std::size_t it = 0;
        for (; it < options.max_iterations; ++it) {
            for (std::size_t n = 0; n < nodes; ++n) {
                const double gs = (b[n] + offdiag(u, n)) / diag;
                u[n] = std::max(v[n], u[n] + options.omega * (gs - u[n]));
            }
            residual = 0.0;
            for (std::size_t n = 0; n < nodes; ++n) {
                const double r = diag * u[n] - offdiag(u, n) - b[n];
                residual = std::max(residual, std::abs(std::min(u[n] - v[n], r)));
            }
            history.push_back(residual);
            if (residual <= options.tolerance) break;
        }
        if (residual > options.tolerance) {
            std::ostringstream msg;
            msg << "psor_oracle: no convergence at step k=" << k << " after " << options.max_iterations
                << " iterations; last residuals:";
            for (std::size_t i = history.size() > 10 ? history.size() - 10 : 0; i < history.size(); ++i) {
                msg << ' ' << history[i];
            }
            throw NumericalError(msg.str());
        }
        res.iterations[k] = it + 1;
        res.max_residual = std::max(res.max_residual, residual);
    }
    return res;
}

double core_sup_distance(const SpaceTimeGrid& grid, const SpaceTimeField& a, const SpaceTimeField& b) {
    if (a.data().size() != b.data().size()) throw ShapeError("core_sup_distance: field sizes differ");
    const auto core = grid.core_mask();
    double d = 0.0;
    for (std::size_t k = 0; k < a.slices(); ++k) {
        for (std::size_t n = 0; n < grid.nodes(); ++n) {
            if (core[n]) d = std::max(d, std::abs(a.at(k, n) - b.at(k, n)));
        }
    }
    return d;
}

}  // namespace ospde
