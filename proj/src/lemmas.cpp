#include "ospde/lemmas.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "ospde/errors.hpp"
#include "ospde/kernel.hpp"
#include "ospde/parallel.hpp"
#include "ospde/random.hpp"
#include "ospde/stencil.hpp"
#include "ospde/verify.hpp"

namespace ospde {

using nlohmann::json;

namespace {

double grad_energy(const SpaceTimeGrid& grid, const SpaceTimeField& u) {
    double s = 0.0;
    for (std::size_t k = 0; k < grid.time_steps(); ++k) {
        const double g = norms::h1_seminorm(grid, u.slice(k));
        s += grid.dt() * g * g;
    }
    return s;
}

void check_schedule(const std::vector<double>& schedule, const char* what) {
    if (schedule.empty()) throw ConfigError(std::string(what) + ": empty schedule");
    for (std::size_t i = 0; i < schedule.size(); ++i) {
        if (!(schedule[i] > 0.0)) throw ConfigError(std::string(what) + ": levels must be > 0");
        if (i > 0 && !(schedule[i] > schedule[i - 1])) {
            throw ConfigError(std::string(what) + ": schedule must be strictly increasing");
        }
    }
}

double interp(std::span<const double> v, double dt, double s) {
    const std::size_t m = v.size() - 1;
    if (m == 0) return v[0];
    const double pos = s / dt;
    std::size_t i = static_cast<std::size_t>(std::max(0.0, std::floor(pos)));
    if (i >= m) i = m - 1;
    const double frac = std::clamp(pos - static_cast<double>(i), 0.0, 1.0);
    return v[i] + frac * (v[i + 1] - v[i]);
}

// Range max / min over node indices in O(1) after O(m log m) setup.
class SparseTable {
public:
    explicit SparseTable(std::span<const double> v) {
        const std::size_t n = v.size();
        max_.emplace_back(v.begin(), v.end());
        min_.emplace_back(v.begin(), v.end());
        for (std::size_t w = 1; (std::size_t{1} << w) <= n; ++w) {
            const std::size_t half = std::size_t{1} << (w - 1);
            const std::size_t len = n - (std::size_t{1} << w) + 1;
            std::vector<double> mx(len), mn(len);
            for (std::size_t i = 0; i < len; ++i) {
                mx[i] = std::max(max_[w - 1][i], max_[w - 1][i + half]);
                mn[i] = std::min(min_[w - 1][i], min_[w - 1][i + half]);
            }
            max_.push_back(std::move(mx));
            min_.push_back(std::move(mn));
        }
    }
    // Inclusive range [lo, hi], lo <= hi.
    std::pair<double, double> range(std::size_t lo, std::size_t hi) const {
        std::size_t w = 0;
        while ((std::size_t{1} << (w + 1)) <= hi - lo + 1) ++w;
        const std::size_t j = hi + 1 - (std::size_t{1} << w);
        return {std::min(min_[w][lo], min_[w][j]), std::max(max_[w][lo], max_[w][j])};
    }

private:
    std::vector<std::vector<double>> max_, min_;
};

}  // namespace

json GradientDecayReport::to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows) {
        rows_json.push_back(
            {{"n", r.n}, {"grad_integral", r.grad_integral}, {"bracket", r.bracket}, {"ratio", r.ratio}});
    }
    return {{"variant", variant}, {"rows", rows_json},   {"spread", spread}, {"spread_limit", spread_limit},
            {"decreasing", decreasing}, {"pass", pass}};
}

GradientDecayReport lemma_gradient_decay(const SpaceTimeGrid& grid, const SpaceTimeField& f,
                                         const std::vector<double>& schedule, double spread_limit) {
    check_schedule(schedule, "gradient decay");
    GradientDecayReport rep;
    rep.variant = "f";
    rep.spread_limit = spread_limit;
    rep.rows.resize(schedule.size());
    const double T = grid.horizon();
    parallel_for(schedule.size(), [&](std::size_t i) {
        const double n = schedule[i];
        const SpaceTimeField u = kernel::apply_resolvent(f, n, grid);
        GradientDecayRow row;
        row.n = n;
        row.grad_integral = grad_energy(grid, u);
        for (std::size_t k = 0; k < grid.time_steps(); ++k) {
            const double l = norms::l2(grid, f.slice(k));
            row.bracket += grid.dt() * l * l * (1.0 / n + std::exp(-2.0 * n * (T - grid.time(k))));
        }
        row.ratio = row.bracket > 0.0 ? row.grad_integral / row.bracket : 0.0;
        rep.rows[i] = row;
    });
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    bool finite = true;
    rep.decreasing = true;
    for (std::size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        finite = finite && std::isfinite(r.ratio);
        lo = std::min(lo, r.ratio);
        hi = std::max(hi, r.ratio);
        if (i > 0) rep.decreasing = rep.decreasing && r.grad_integral < rep.rows[i - 1].grad_integral;
    }
    if (hi == 0.0) {
        rep.spread = 1.0;  // f = 0: every integral vanishes
        rep.decreasing = true;
    } else {
        rep.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    }
    rep.pass = finite && rep.spread <= spread_limit;
    return rep;
}

GradientDecayReport lemma_gradient_decay_div(const SpaceTimeGrid& grid, const SpaceTimeField& g,
                                             const std::vector<double>& schedule) {
    check_schedule(schedule, "gradient decay (div g)");
    if (g.width() != static_cast<std::size_t>(grid.dim()) || g.slices() != grid.time_steps() + 1) {
        throw ShapeError("gradient decay (div g): g must have dim components on the full mesh");
    }
    SpaceTimeField src = SpaceTimeField::on(grid);
    for (std::size_t k = 0; k <= grid.time_steps(); ++k) stencil::divergence(grid, g.slice(k), src.slice(k));
    GradientDecayReport rep = lemma_gradient_decay(grid, src, schedule, std::numeric_limits<double>::infinity());
    rep.variant = "div_g";
    rep.pass = rep.decreasing;
    return rep;
}

double modulus_of_continuity(std::span<const double> values, double dt, double delta) {
    if (values.empty()) throw DomainError("modulus_of_continuity: empty series");
    if (!(dt > 0.0)) throw DomainError("modulus_of_continuity: dt must be > 0");
    if (!(delta >= 0.0)) throw DomainError("modulus_of_continuity: delta must be >= 0");
    const std::size_t m = values.size() - 1;
    if (m == 0 || delta == 0.0) return 0.0;
    const double end = dt * static_cast<double>(m);
    const SparseTable table(values);
    if (delta >= end) {
        const auto [lo, hi] = table.range(0, m);
        return hi - lo;
    }
    // On each stretch where the set of interior nodes is fixed, max - min of the
    // window is convex in its start, so the extremes sit at the breakpoints.
    std::vector<double> starts{0.0, end - delta};
    for (std::size_t i = 0; i <= m; ++i) {
        const double t = dt * static_cast<double>(i);
        if (t <= end - delta) starts.push_back(t);
        if (t - delta >= 0.0) starts.push_back(t - delta);
    }
    double best = 0.0;
    for (double a : starts) {
        const double b = a + delta;
        double lo = std::min(interp(values, dt, a), interp(values, dt, b));
        double hi = std::max(interp(values, dt, a), interp(values, dt, b));
        const auto i0 = static_cast<std::size_t>(std::max(0.0, std::ceil(a / dt - 1e-9)));
        const auto i1 = std::min(m, static_cast<std::size_t>(std::floor(b / dt + 1e-9)));
        if (i0 <= i1) {
            const auto [mn, mx] = table.range(i0, i1);
            lo = std::min(lo, mn);
            hi = std::max(hi, mx);
        }
        best = std::max(best, hi - lo);
    }
    return best;
}

json SmoothingReport::to_json() const {
    json rows_json = json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"n", r.n},
                             {"sup_sq_error", r.sup_sq_error},
                             {"stderr", r.stderr_},
                             {"dominated", r.dominated},
                             {"min_margin", r.min_margin}});
    }
    return {{"rows", rows_json},          {"delta", delta}, {"paths", paths}, {"decreasing", decreasing},
            {"all_dominated", all_dominated}, {"pass", pass}};
}

SmoothingReport lemma_obstacle_smoothing(const ObstacleProblem& problem, const ForwardPathBatch& paths,
                                         const std::vector<double>& schedule, double delta) {
    check_schedule(schedule, "obstacle smoothing");
    if (!(delta > 0.0)) throw DomainError("obstacle smoothing: delta must be > 0");
    const auto& grid = problem.grid;
    const std::size_t nt = grid.time_steps();
    const double dt = grid.dt();
    const std::size_t M = paths.size();
    const std::size_t L = schedule.size();
    std::vector<std::vector<double>> err(L, std::vector<double>(M)), margin(L, std::vector<double>(M));

    parallel_for(M, [&](std::size_t m) {
        const ForwardPath path = paths.path(m);
        std::vector<double> S(nt + 1);
        double s_sup = 0.0;
        for (std::size_t k = 0; k <= nt; ++k) {
            S[k] = problem.v_fn(grid.time(k), path.at(k));
            s_sup = std::max(s_sup, std::abs(S[k]));
        }
        const double omega = modulus_of_continuity(S, dt, delta);
        for (std::size_t l = 0; l < L; ++l) {
            const double n = schedule[l];
            const auto Y = kernel::exp_average_profile(S, dt, n);
            double V = 0.0;
            for (std::size_t k = 0; k <= nt; ++k) V = std::max(V, std::abs(Y[k] - S[k]));
            err[l][m] = V * V;
            margin[l][m] = omega + 2.0 * std::exp(-n * delta) * s_sup - V;
        }
    });

    SmoothingReport rep;
    rep.delta = delta;
    rep.paths = M;
    rep.all_dominated = true;
    std::vector<double> stat;
    for (std::size_t l = 0; l < L; ++l) {
        SmoothingRow row;
        row.n = schedule[l];
        const double mean = pairwise_sum(err[l]) / static_cast<double>(M);
        std::vector<double> dev(M);
        for (std::size_t m = 0; m < M; ++m) dev[m] = (err[l][m] - mean) * (err[l][m] - mean);
        const double var = pairwise_sum(dev) / static_cast<double>(M - 1);
        row.sup_sq_error = paths.weight() * mean;
        row.stderr_ = paths.weight() * std::sqrt(var / static_cast<double>(M));
        row.min_margin = *std::min_element(margin[l].begin(), margin[l].end());
        for (double mg : margin[l]) row.dominated += mg >= -1e-12;
        rep.all_dominated = rep.all_dominated && row.dominated == M;
        stat.push_back(row.sup_sq_error);
        rep.rows.push_back(row);
    }
    rep.decreasing = true;
    for (std::size_t l = 1; l < L; ++l) rep.decreasing = rep.decreasing && stat[l] < stat[l - 1];
    rep.pass = rep.decreasing && rep.all_dominated;
    return rep;
}

CalculusCheck lemma_calculus(std::span<const double> phi, double dt, double lambda, double delta, double tol) {
    if (phi.size() < 2) throw DomainError("lemma_calculus: need at least two samples");
    if (!(lambda > 0.0)) throw DomainError("lemma_calculus: lambda must be > 0");
    const double end = dt * static_cast<double>(phi.size() - 1);
    if (!(delta > 0.0 && delta < end)) throw DomainError("lemma_calculus: delta must lie in (0, T)");

    CalculusCheck out;
    std::vector<double> times, vals;
    for (std::size_t i = 0; i < phi.size(); ++i) {
        const double t = dt * static_cast<double>(i);
        if (t >= delta) break;
        times.push_back(t);
        vals.push_back(phi[i]);
    }
    times.push_back(delta);
    vals.push_back(interp(phi, dt, delta));
    double sup0 = 0.0;
    for (double v : vals) sup0 = std::max(sup0, std::abs(v - phi[0]));
    const double lhs1 = std::abs(kernel::exp_average(times, vals, lambda) - phi[0]);
    out.margin_first = sup0 - lhs1;

    const auto avg = kernel::exp_average_profile(phi, dt, lambda);
    double norm = 0.0;
    for (double v : phi) norm = std::max(norm, std::abs(v));
    const double rhs2 = modulus_of_continuity(phi, dt, delta) + 2.0 * std::exp(-lambda * delta) * norm;
    out.margin_second = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < phi.size(); ++k) {
        out.margin_second = std::min(out.margin_second, rhs2 - std::abs(avg[k] - phi[k]));
    }
    out.pass = out.margin_first >= -tol && out.margin_second >= -tol;
    return out;
}

json CalculusProperty::to_json() const {
    return {{"tested", tested},
            {"violations", violations},
            {"min_margin_first", min_margin_first},
            {"min_margin_second", min_margin_second},
            {"pass", pass}};
}

CalculusProperty lemma_calculus_property(std::size_t count, std::uint64_t seed, double tol) {
    std::vector<CalculusCheck> checks(count);
    parallel_for(count, [&](std::size_t i) {
        auto rng = make_stream(seed, StreamTag::property, i);
        std::uniform_int_distribution<int> segs(1, 64);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        std::normal_distribution<double> gauss(0.0, 1.0);
        const int m = segs(rng);
        const double dt = 1.0 / m;
        const double scale = std::pow(10.0, 2.0 * unit(rng) - 1.0);
        const bool walk = unit(rng) < 0.5;
        std::vector<double> phi(static_cast<std::size_t>(m) + 1);
        for (std::size_t j = 0; j < phi.size(); ++j) {
            const double step = scale * gauss(rng);
            phi[j] = walk && j > 0 ? phi[j - 1] + step * std::sqrt(dt) : step;
        }
        const double lambda = std::pow(10.0, 4.0 * unit(rng) - 1.0);
        const double delta = 1e-3 + (1.0 - 2e-3) * unit(rng);
        checks[i] = lemma_calculus(phi, dt, lambda, delta, tol);
    });
    CalculusProperty p;
    p.tested = count;
    p.min_margin_first = std::numeric_limits<double>::infinity();
    p.min_margin_second = std::numeric_limits<double>::infinity();
    for (const auto& c : checks) {
        p.violations += !c.pass;
        p.min_margin_first = std::min(p.min_margin_first, c.margin_first);
        p.min_margin_second = std::min(p.min_margin_second, c.margin_second);
    }
    p.pass = p.violations == 0;
    return p;
}

json MazurResult::to_json() const {
    return {{"weights", weights},
            {"distance", distance},
            {"best_single_distance", best_single_distance},
            {"best_single_index", best_single_index},
            {"iterations", iterations}};
}

std::vector<double> project_to_simplex(std::span<const double> v) {
    if (v.empty()) throw DomainError("project_to_simplex: empty vector");
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cum = 0.0, theta = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        cum += u[i];
        const double t = (cum - 1.0) / static_cast<double>(i + 1);
        if (u[i] - t > 0.0) theta = t;
    }
    std::vector<double> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = std::max(v[i] - theta, 0.0);
    return out;
}

MazurResult mazur_combine(const std::vector<std::vector<double>>& vectors, std::span<const double> target,
                          std::size_t iterations) {
    if (vectors.empty()) throw DomainError("mazur_combine: no vectors");
    const std::size_t dim = target.size();
    for (const auto& x : vectors) {
        if (x.size() != dim) throw ShapeError("mazur_combine: all vectors must match the target's shape");
    }
    const std::size_t m = vectors.size();
    auto dot = [dim](std::span<const double> a, std::span<const double> b) {
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += a[i] * b[i];
        return s;
    };
    std::vector<double> G(m * m), b(m);
    for (std::size_t i = 0; i < m; ++i) {
        b[i] = dot(vectors[i], target);
        for (std::size_t j = 0; j <= i; ++j) G[i * m + j] = G[j * m + i] = dot(vectors[i], vectors[j]);
    }
    auto distance_of = [&](const std::vector<double>& w) {
        double s = 0.0;
        for (std::size_t q = 0; q < dim; ++q) {
            double c = -target[q];
            for (std::size_t i = 0; i < m; ++i) c += w[i] * vectors[i][q];
            s += c * c;
        }
        return std::sqrt(s);
    };
    auto objective = [&](const std::vector<double>& w) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            double gw = 0.0;
            for (std::size_t j = 0; j < m; ++j) gw += G[i * m + j] * w[j];
            s += w[i] * (0.5 * gw - b[i]);
        }
        return s;
    };

    MazurResult res;
    res.best_single_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m; ++i) {
        std::vector<double> e(m, 0.0);
        e[i] = 1.0;
        const double d = distance_of(e);
        if (d < res.best_single_distance) {
            res.best_single_distance = d;
            res.best_single_index = i;
        }
    }

    // Largest eigenvalue of G by power iteration sets the step.
    std::vector<double> x(m, 1.0), y(m);
    double L = 0.0;
    for (int it = 0; it < 200; ++it) {
        double nrm = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            y[i] = 0.0;
            for (std::size_t j = 0; j < m; ++j) y[i] += G[i * m + j] * x[j];
            nrm += y[i] * y[i];
        }
        nrm = std::sqrt(nrm);
        if (nrm == 0.0) break;
        double xn = 0.0;
        for (double v : x) xn += v * v;
        L = nrm / std::sqrt(xn);
        for (std::size_t i = 0; i < m; ++i) x[i] = y[i] / nrm;
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < m; ++i) trace += G[i * m + i];
    L = std::min(std::max(1.05 * L, 1e-300), std::max(trace, 1e-300));

    std::vector<double> w(m, 1.0 / static_cast<double>(m)), z = w, best = w, grad(m), step(m);
    double best_obj = objective(w);
    double t = 1.0;
    for (std::size_t it = 0; it < iterations; ++it) {
        for (std::size_t i = 0; i < m; ++i) {
            double gz = -b[i];
            for (std::size_t j = 0; j < m; ++j) gz += G[i * m + j] * z[j];
            step[i] = z[i] - gz / L;
        }
        std::vector<double> w_new = project_to_simplex(step);
        const double t_new = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        for (std::size_t i = 0; i < m; ++i) z[i] = w_new[i] + ((t - 1.0) / t_new) * (w_new[i] - w[i]);
        w = std::move(w_new);
        t = t_new;
        const double obj = objective(w);
        if (obj < best_obj) {
            best_obj = obj;
            best = w;
        }
        res.iterations = it + 1;
    }

    res.weights = best;
    res.distance = distance_of(best);
    if (res.distance > res.best_single_distance) {
        res.weights.assign(m, 0.0);
        res.weights[res.best_single_index] = 1.0;
        res.distance = res.best_single_distance;
    }
    return res;
}

std::vector<std::vector<double>> oscillating_instance(std::size_t count, std::size_t dim, std::uint64_t seed) {
    if (dim < 2) throw DomainError("oscillating_instance: dim must be >= 2");
    std::vector<std::vector<double>> xs(count, std::vector<double>(dim, 0.0));
    for (std::size_t i = 0; i < count; ++i) {
        auto rng = make_stream(seed, StreamTag::property, 1000000 + i);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> z(dim, 0.0);
        double nrm = 0.0;
        for (std::size_t q = 1; q < dim; ++q) {
            z[q] = gauss(rng);
            nrm += z[q] * z[q];
        }
        nrm = std::sqrt(nrm);
        const double scale = 1.0 / (static_cast<double>(i + 1) * nrm);
        xs[i][0] = i % 2 == 0 ? 1.0 : -1.0;
        for (std::size_t q = 1; q < dim; ++q) xs[i][q] = z[q] * scale;
    }
    return xs;
}

}  // namespace ospde
