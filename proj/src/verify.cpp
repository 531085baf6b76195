#include "ospde/verify.hpp"

#include <cmath>
#include <numbers>

#include "ospde/errors.hpp"
#include "ospde/parallel.hpp"
#include "ospde/stencil.hpp"

namespace ospde {

using nlohmann::json;

namespace {

struct MeanStat {
    double mean = 0.0;
    double stderr_ = 0.0;
};

// Mean and standard error of the selected entries, summed pairwise in index order.
MeanStat mean_stat(const std::vector<double>& values, const std::vector<char>& use) {
    std::vector<double> picked;
    picked.reserve(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (use[i]) picked.push_back(values[i]);
    }
    MeanStat s;
    const std::size_t m = picked.size();
    if (m == 0) return s;
    s.mean = pairwise_sum(picked) / static_cast<double>(m);
    if (m < 2) return s;
    for (double& v : picked) v = (v - s.mean) * (v - s.mean);
    const double var = pairwise_sum(picked) / static_cast<double>(m - 1);
    s.stderr_ = std::sqrt(var / static_cast<double>(m));
    return s;
}

std::size_t slice_of(const SpaceTimeGrid& grid, double fraction) {
    if (!(fraction >= 0.0 && fraction <= 1.0)) throw ConfigError("slice fractions must lie in [0, 1]");
    return static_cast<std::size_t>(std::llround(fraction * static_cast<double>(grid.time_steps())));
}

double phi_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

Vec2 vec_at(std::span<const double> z, std::size_t k, int d) {
    Vec2 out{};
    for (int a = 0; a < d; ++a) out[a] = z[k * d + a];
    return out;
}

}  // namespace

Box path_region(const SpaceTimeGrid& grid, double guard_cells) {
    double guard = 0.0;
    for (int a = 0; a < grid.dim(); ++a) guard = std::max(guard, guard_cells * grid.dx(a));
    return grid.shrunk(guard);
}

PathProcesses path_processes(const PenalizedSolution& sol, const ObstacleProblem& problem, const ForwardPath& path,
                             const Box& region) {
    const auto& grid = problem.grid;
    const std::size_t nt = grid.time_steps();
    const int d = grid.dim();
    PathProcesses p;
    p.index = path.index;
    p.Y.assign(nt + 1, 0.0);
    p.Z.assign((nt + 1) * d, 0.0);
    p.S.assign(nt + 1, 0.0);
    p.K.assign(nt + 1, 0.0);
    p.exit_step = nt + 1;
    for (std::size_t k = 0; k <= nt; ++k) {
        const Point w = path.at(k);
        if (!region.contains(w)) {
            p.exit_step = k;
            break;
        }
        p.Y[k] = grid.interpolate(sol.u.slice(k), w);
        for (int a = 0; a < d; ++a) {
            p.Z[k * d + a] = grid.interpolate(sol.grad.slice(k), w, static_cast<std::size_t>(d), a);
        }
        p.S[k] = problem.v_fn(grid.time(k), w);
    }
    const std::size_t last = std::min(p.exit_step, nt + 1);
    for (std::size_t k = 1; k < last; ++k) {
        p.K[k] = p.K[k - 1] + sol.level * std::max(p.S[k - 1] - p.Y[k - 1], 0.0) * grid.dt();
    }
    // K is frozen after the exit time.
    for (std::size_t k = std::max<std::size_t>(last, 1); k <= nt; ++k) p.K[k] = p.K[k - 1];
    return p;
}

json ResidualStats::to_json() const {
    json rows = json::array();
    for (const auto& s : slices) {
        rows.push_back({{"k", s.k},
                        {"t", s.t},
                        {"mean", s.mean},
                        {"stderr", s.stderr_},
                        {"max_abs", s.max_abs},
                        {"bound", s.bound},
                        {"pass", s.pass}});
    }
    return {{"slices", rows},
            {"paths", paths},
            {"excluded", excluded},
            {"excluded_fraction", excluded_fraction()},
            {"allowance", allowance},
            {"pass", pass}};
}

ResidualStats verify_bsde_residual(const PenalizedSolution& sol, const ObstacleProblem& problem,
                                   const ForwardPathBatch& paths, const BackwardNoisePath& noise,
                                   const ResidualOptions& options) {
    if (sol.noise_seed != noise.seed) {
        throw ConfigError("verify_bsde_residual: solution was computed with noise seed " +
                          std::to_string(sol.noise_seed) + ", got " + std::to_string(noise.seed));
    }
    const auto& grid = problem.grid;
    const auto& c = problem.coeffs;
    if (paths.time_steps() != grid.time_steps() || noise.nt != grid.time_steps()) {
        throw ShapeError("verify_bsde_residual: paths, noise and grid differ in length");
    }
    const std::size_t nt = grid.time_steps();
    const int d = grid.dim();
    const std::size_t d1 = noise.d1;
    const double dt = grid.dt();

    std::vector<std::size_t> ks;
    for (double f : options.slice_fractions) ks.push_back(std::min(slice_of(grid, f), nt));
    const Box region = path_region(grid, options.guard_cells);

    const std::size_t M = paths.size();
    std::vector<std::vector<double>> residual(ks.size(), std::vector<double>(M, 0.0));
    std::vector<char> inside(M, 0);

    parallel_for(M, [&](std::size_t m) {
        const ForwardPath path = paths.path(m);
        const PathProcesses pp = path_processes(sol, problem, path, region);
        if (!pp.stayed_inside(nt)) return;
        inside[m] = 1;
        std::vector<double> f(nt + 1), g((nt + 1) * d), h((nt + 1) * d1);
        for (std::size_t k = 0; k <= nt; ++k) {
            const double t = grid.time(k);
            const Point x = path.at(k);
            const Vec2 z = vec_at(pp.Z, k, d);
            f[k] = c.f(t, x, pp.Y[k], z);
            c.g(t, x, pp.Y[k], z, std::span<double>(g.data() + k * d, static_cast<std::size_t>(d)));
            c.h(t, x, pp.Y[k], z, std::span<double>(h.data() + k * d1, d1));
        }
        // acc_k = sum_{j >= k} of the bracketed increments.
        std::vector<double> acc(nt + 1, 0.0);
        for (std::size_t j = nt; j-- > 0;) {
            const auto dw = path.increment(j);
            const auto db = noise.increment(j);
            double inc = f[j + 1] * dt + (pp.K[j + 1] - pp.K[j]);
            for (int a = 0; a < d; ++a) inc += (g[(j + 1) * d + a] - g[j * d + a] - pp.Z[j * d + a]) * dw[a];
            for (std::size_t i = 0; i < d1; ++i) inc += h[(j + 1) * d1 + i] * db[i];
            acc[j] = acc[j + 1] + inc;
        }
        for (std::size_t s = 0; s < ks.size(); ++s) {
            const std::size_t k = ks[s];
            residual[s][m] = pp.Y[k] - (pp.Y[nt] + acc[k]);
        }
    });

    ResidualStats stats;
    for (char in : inside) (in ? stats.paths : stats.excluded)++;
    if (stats.paths < 2) throw NumericalError("verify_bsde_residual: fewer than 2 paths stayed inside the grid");
    stats.allowance = options.allowance_constant * (dt + grid.dx(0));
    stats.pass = true;
    for (std::size_t s = 0; s < ks.size(); ++s) {
        SliceStat st;
        st.k = ks[s];
        st.t = grid.time(ks[s]);
        const MeanStat ms = mean_stat(residual[s], inside);
        st.mean = ms.mean;
        st.stderr_ = ms.stderr_;
        for (std::size_t m = 0; m < M; ++m) {
            if (inside[m]) st.max_abs = std::max(st.max_abs, std::abs(residual[s][m]));
        }
        st.bound = 3.0 * st.stderr_ + stats.allowance;
        st.pass = std::abs(st.mean) <= st.bound;
        stats.pass = stats.pass && st.pass;
        stats.slices.push_back(st);
    }
    return stats;
}

std::size_t count_increases(const std::vector<double>& values) {
    std::size_t c = 0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        for (std::size_t j = i + 1; j < values.size(); ++j) c += values[i] < values[j];
    }
    return c;
}

bool decreasing_trend(const std::vector<double>& values, std::size_t allowed) {
    return count_increases(values) <= allowed;
}

json SkorokhodTable::to_json() const {
    json out = json::array();
    for (const auto& r : rows) {
        out.push_back({{"n", r.n},
                       {"sup_negative_sq", r.sup_negative_sq},
                       {"sup_negative_sq_stderr", r.sup_negative_sq_stderr},
                       {"reflection", r.reflection},
                       {"reflection_stderr", r.reflection_stderr},
                       {"penalty_energy", r.penalty_energy}});
    }
    return {{"rows", out},
            {"paths", paths},
            {"truncated", truncated},
            {"sup_decreasing", sup_decreasing},
            {"reflection_decreasing", reflection_decreasing},
            {"pass", pass}};
}

SkorokhodTable verify_skorokhod(const std::vector<PenalizedSolution>& sols, const ObstacleProblem& problem,
                                const ForwardPathBatch& paths, double guard_cells) {
    if (sols.empty()) throw ConfigError("verify_skorokhod: no solutions");
    for (const auto& s : sols) {
        if (s.noise_seed != sols.front().noise_seed) throw ConfigError("verify_skorokhod: solutions use different noise");
    }
    const auto& grid = problem.grid;
    const std::size_t nt = grid.time_steps();
    const double dt = grid.dt();
    const std::size_t L = sols.size();
    const std::size_t M = paths.size();
    const Box region = path_region(grid, guard_cells);
    const auto& limit = sols.back();

    std::vector<std::vector<double>> sup_neg(L, std::vector<double>(M)), refl(L, std::vector<double>(M)),
        energy(L, std::vector<double>(M));
    std::vector<char> truncated(M, 0);

    parallel_for(M, [&](std::size_t m) {
        const ForwardPath path = paths.path(m);
        const PathProcesses lim = path_processes(limit, problem, path, region);
        truncated[m] = !lim.stayed_inside(nt);
        const std::size_t end = std::min(lim.exit_step, nt + 1);
        for (std::size_t l = 0; l < L; ++l) {
            const PathProcesses pp = &sols[l] == &limit ? lim : path_processes(sols[l], problem, path, region);
            double sup = 0.0, r = 0.0, e = 0.0;
            for (std::size_t k = 0; k < end; ++k) {
                const double neg = std::max(pp.S[k] - pp.Y[k], 0.0);
                sup = std::max(sup, neg * neg);
                if (k < nt && k + 1 < end) {
                    const double dk = pp.K[k + 1] - pp.K[k];
                    r += std::max(lim.Y[k] - lim.S[k], 0.0) * dk;
                    e += sols[l].level * neg * neg * dt;
                }
            }
            sup_neg[l][m] = sup;
            refl[l][m] = r;
            energy[l][m] = e;
        }
    });

    SkorokhodTable table;
    table.paths = M;
    for (char t : truncated) table.truncated += t;
    const std::vector<char> all(M, 1);
    const double w = paths.weight();
    std::vector<double> sups, refls;
    for (std::size_t l = 0; l < L; ++l) {
        SkorokhodRow row;
        row.n = sols[l].level;
        const MeanStat s = mean_stat(sup_neg[l], all);
        const MeanStat r = mean_stat(refl[l], all);
        const MeanStat e = mean_stat(energy[l], all);
        row.sup_negative_sq = w * s.mean;
        row.sup_negative_sq_stderr = w * s.stderr_;
        row.reflection = w * r.mean;
        row.reflection_stderr = w * r.stderr_;
        row.penalty_energy = w * e.mean;
        sups.push_back(row.sup_negative_sq);
        refls.push_back(row.reflection);
        table.rows.push_back(row);
    }
    table.sup_decreasing = decreasing_trend(sups);
    table.reflection_decreasing = decreasing_trend(refls);
    table.pass = table.sup_decreasing && table.reflection_decreasing;
    return table;
}

double TestFunction::eval(double t, const Point& x, int dim, double horizon) const {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
    return (1.0 + time_slope * t / horizon) * std::exp(-r2 / (2.0 * width * width));
}

std::vector<TestFunction> default_test_functions() {
    return {
        {"bump_center", {0.0, 0.0}, 0.3, 0.0},
        {"bump_right_growing", {0.4, 0.2}, 0.2, 1.0},
        {"bump_left_decaying", {-0.3, -0.1}, 0.5, -0.5},
    };
}

Field occupation_weight(const SpaceTimeGrid& grid, const Box& box, double t) {
    Field w(grid.nodes(), 1.0);
    const double s = std::sqrt(t);
    for (std::size_t n = 0; n < grid.nodes(); ++n) {
        const Point x = grid.point(n);
        for (int a = 0; a < grid.dim(); ++a) {
            double f;
            if (t == 0.0) {
                const bool in = x[a] > box.lower[a] && x[a] < box.upper[a];
                const bool face = x[a] == box.lower[a] || x[a] == box.upper[a];
                f = in ? 1.0 : (face ? 0.5 : 0.0);
            } else {
                f = phi_cdf((box.upper[a] - x[a]) / s) - phi_cdf((box.lower[a] - x[a]) / s);
            }
            w[n] *= f;
        }
    }
    return w;
}

json EnergyReport::to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"t", r.t},
                             {"k", r.k},
                             {"lhs", r.lhs},
                             {"rhs", r.rhs},
                             {"rhs_stderr", r.rhs_stderr},
                             {"relative_error", r.relative_error},
                             {"pass", r.pass}});
    }
    json meas = json::array();
    for (const auto& r : measure) {
        meas.push_back({{"name", r.name},
                        {"grid", r.grid_value},
                        {"monte_carlo", r.mc_value},
                        {"stderr", r.mc_stderr},
                        {"pass", r.pass}});
    }
    return {{"energy", rows_json}, {"measure", meas}, {"paths", paths}, {"pass", pass}};
}

EnergyReport verify_energy_identity(const ObstacleProblem& shell, const ForwardPathBatch& paths,
                                    const EnergyOptions& options) {
    const auto& grid = shell.grid;
    const auto& c = shell.coeffs;
    if (!c.g_is_zero() || !c.h_is_zero()) throw ConfigError("energy identity: g and h must be zero");
    if (shell.has_obstacle()) throw ConfigError("energy identity: the shell must not have an obstacle");
    for (double p : shell.phi) {
        if (p != 0.0) throw ConfigError("energy identity: terminal value must be zero");
    }
    const std::size_t nt = grid.time_steps();
    const std::size_t nodes = grid.nodes();
    const int d = grid.dim();
    const double dt = grid.dt();
    const double dx = grid.cell_volume();
    const Vec2 zero{};
    for (std::size_t k = 0; k <= nt; ++k) {
        for (std::size_t n = 0; n < nodes; ++n) {
            if (c.f(grid.time(k), grid.point(n), 0.0, zero) < 0.0) {
                throw DomainError("energy identity: f is negative at slice " + std::to_string(k) + ", node " +
                                  std::to_string(n));
            }
        }
    }

    const auto noise = sample_backward_noise(0, nt, static_cast<std::size_t>(c.d1), dt);
    const PenalizedSolution sol = solve_penalized(shell, 0.0, noise);
    const Box& core = paths.sampling_region();
    std::vector<Field> w(nt + 1);
    for (std::size_t k = 0; k <= nt; ++k) w[k] = occupation_weight(grid, core, grid.time(k));

    // sum_x w_j |grad u_j|^2 dx, accumulated backward in j.
    std::vector<double> grad_tail(nt + 1, 0.0);
    for (std::size_t j = nt; j-- > 0;) {
        double s = 0.0;
        for (std::size_t n = 0; n < nodes; ++n) {
            double g2 = 0.0;
            for (int a = 0; a < d; ++a) g2 += sol.grad.at(j, n, a) * sol.grad.at(j, n, a);
            s += w[j][n] * g2;
        }
        grad_tail[j] = grad_tail[j + 1] + dt * dx * s;
    }

    std::vector<std::size_t> ks;
    for (double f : options.time_fractions) ks.push_back(std::min(slice_of(grid, f), nt));
    const std::size_t M = paths.size();
    const auto& tests = options.test_functions;
    std::vector<std::vector<double>> sq(ks.size(), std::vector<double>(M)), tf(tests.size(), std::vector<double>(M));
    const double T = grid.horizon();

    parallel_for(M, [&](std::size_t m) {
        const ForwardPath path = paths.path(m);
        std::vector<double> a(nt + 1, 0.0);
        std::vector<double> tsum(tests.size(), 0.0);
        for (std::size_t j = nt; j-- > 0;) {
            const double t = grid.time(j + 1);
            const Point x = path.at(j + 1);
            const double da = c.f(t, x, 0.0, zero) * dt;
            a[j] = a[j + 1] + da;
            for (std::size_t q = 0; q < tests.size(); ++q) tsum[q] += tests[q].eval(t, x, d, T) * da;
        }
        for (std::size_t s = 0; s < ks.size(); ++s) sq[s][m] = a[ks[s]] * a[ks[s]];
        for (std::size_t q = 0; q < tests.size(); ++q) tf[q][m] = tsum[q];
    });

    EnergyReport rep;
    rep.paths = M;
    rep.pass = true;
    const std::vector<char> all(M, 1);
    const double vol = paths.weight();
    for (std::size_t s = 0; s < ks.size(); ++s) {
        EnergyRow row;
        row.k = ks[s];
        row.t = grid.time(row.k);
        double mass = 0.0;
        for (std::size_t n = 0; n < nodes; ++n) mass += w[row.k][n] * sol.u.at(row.k, n) * sol.u.at(row.k, n);
        row.lhs = mass * dx + grad_tail[row.k];
        const MeanStat ms = mean_stat(sq[s], all);
        row.rhs = vol * ms.mean;
        row.rhs_stderr = vol * ms.stderr_;
        const double gap = std::abs(row.lhs - row.rhs);
        row.relative_error = row.lhs != 0.0 ? gap / std::abs(row.lhs) : gap;
        row.pass = gap <= 3.0 * row.rhs_stderr + options.relative_allowance * std::abs(row.lhs);
        rep.pass = rep.pass && row.pass;
        rep.rows.push_back(row);
    }

    if (!tests.empty()) {
        // Grid density of nu on slice k from the discrete equation; it is attached to t_{k+1}.
        std::vector<double> lap(nodes);
        for (std::size_t q = 0; q < tests.size(); ++q) {
            double total = 0.0;
            for (std::size_t k = 0; k < nt; ++k) {
                stencil::laplacian(grid, sol.u.slice(k), lap);
                const double t = grid.time(k + 1);
                double s = 0.0;
                for (std::size_t n = 0; n < nodes; ++n) {
                    const double nu = (sol.u.at(k, n) - sol.u.at(k + 1, n)) / dt - 0.5 * lap[n];
                    s += w[k + 1][n] * tests[q].eval(t, grid.point(n), d, T) * nu;
                }
                total += dt * dx * s;
            }
            MeasureRow row;
            row.name = tests[q].name;
            row.grid_value = total;
            const MeanStat ms = mean_stat(tf[q], all);
            row.mc_value = vol * ms.mean;
            row.mc_stderr = vol * ms.stderr_;
            row.pass = std::abs(row.grid_value - row.mc_value) <= 3.0 * row.mc_stderr;
            rep.pass = rep.pass && row.pass;
            rep.measure.push_back(row);
        }
    }
    return rep;
}

}  // namespace ospde
