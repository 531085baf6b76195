#include "ospde/problem.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "ospde/errors.hpp"
#include "ospde/random.hpp"
#include "ospde/stencil.hpp"

namespace ospde {

using nlohmann::json;

namespace {

void reject_unknown(const json& block, std::initializer_list<const char*> keys, const std::string& where) {
    if (!block.is_object()) throw ConfigError(where + ": expected an object");
    for (const auto& [key, value] : block.items()) {
        bool ok = false;
        for (const char* k : keys) ok = ok || key == k;
        if (!ok) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

template <class T>
T required(const json& block, const char* key, const std::string& where) {
    if (!block.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
    try {
        return block[key].get<T>();
    } catch (const json::exception&) {
        throw ConfigError(where + ": key '" + key + "' has the wrong type");
    }
}

double norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double ratio(double diff, double denom) {
    if (denom > 0.0) return diff / denom;
    return diff > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
}

}  // namespace

SpaceTimeGrid make_grid(const json& block) {
    reject_unknown(block, {"axes", "time_steps", "horizon", "core_margin"}, "grid");
    const json& axes = block.contains("axes") ? block["axes"] : json();
    if (!axes.is_array() || axes.empty()) throw ConfigError("grid: 'axes' must be a nonempty array");
    std::vector<Axis> out;
    for (const auto& a : axes) {
        reject_unknown(a, {"lower", "upper", "nodes"}, "grid.axes");
        Axis ax;
        ax.lower = required<double>(a, "lower", "grid.axes");
        ax.upper = required<double>(a, "upper", "grid.axes");
        const auto nodes = required<long long>(a, "nodes", "grid.axes");
        if (nodes < 3) throw ConfigError("grid: every axis needs at least 3 nodes");
        ax.nodes = static_cast<std::size_t>(nodes);
        out.push_back(ax);
    }
    const auto nt = required<long long>(block, "time_steps", "grid");
    if (nt < 1) throw ConfigError("grid: time_steps must be >= 1");
    const double horizon = required<double>(block, "horizon", "grid");
    const double margin = block.contains("core_margin") ? required<double>(block, "core_margin", "grid") : -1.0;
    if (block.contains("core_margin") && margin < 0.0) throw ConfigError("grid: core_margin must be >= 0");
    return SpaceTimeGrid(std::move(out), static_cast<std::size_t>(nt), horizon, margin);
}

ObstacleProblem build_problem(const json& block) {
    reject_unknown(block, {"grid", "coefficients", "terminal", "obstacle"}, "problem");
    if (!block.contains("grid")) throw ConfigError("problem: missing key 'grid'");
    if (!block.contains("terminal")) throw ConfigError("problem: missing key 'terminal'");
    SpaceTimeGrid grid = make_grid(block["grid"]);
    const int d = grid.dim();
    CoefficientSet coeffs = make_coefficients(block.value("coefficients", json::object()), d);

    const json none = {{"family", "none"}};
    const json& term = block["terminal"];
    const json& obst = block.contains("obstacle") ? block["obstacle"] : none;
    SpaceTimeFunction phi_fn = make_space_time_function(term, d, "terminal");
    SpaceTimeFunction v_fn = make_space_time_function(obst, d, "obstacle");
    const std::string term_family = term["family"].get<std::string>();
    if (term_family == "none") throw ConfigError("terminal: family 'none' is only valid for the obstacle");

    Field phi(grid.nodes());
    SpaceTimeField v = SpaceTimeField::on(grid);
    const double T = grid.horizon();
    for (std::size_t n = 0; n < grid.nodes(); ++n) {
        phi[n] = phi_fn(T, grid.point(n));
        if (!std::isfinite(phi[n])) throw ConfigError("terminal: non-finite value at node " + std::to_string(n));
    }
    for (std::size_t k = 0; k <= grid.time_steps(); ++k) {
        const double t = grid.time(k);
        for (std::size_t n = 0; n < grid.nodes(); ++n) {
            const double value = v_fn(t, grid.point(n));
            if (!std::isfinite(value)) {
                throw ConfigError("obstacle: non-finite value at slice " + std::to_string(k) + ", node " +
                                  std::to_string(n));
            }
            v.at(k, n) = value;
        }
    }

    std::vector<std::size_t> bad;
    for (std::size_t n = 0; n < grid.nodes(); ++n) {
        if (v.at(grid.time_steps(), n) > phi[n]) bad.push_back(n);
    }
    if (!bad.empty()) {
        std::ostringstream msg;
        msg << "obstacle exceeds the terminal value at time T on " << bad.size() << " node(s):";
        for (std::size_t i = 0; i < bad.size() && i < 20; ++i) {
            const Point p = grid.point(bad[i]);
            msg << " #" << bad[i] << "(x=" << p[0];
            if (d == 2) msg << ",y=" << p[1];
            msg << ")";
        }
        if (bad.size() > 20) msg << " ...";
        throw ConfigError(msg.str());
    }

    return ObstacleProblem{std::move(grid), std::move(coeffs), std::move(phi), std::move(v),
                           std::move(phi_fn), std::move(v_fn), term_family,
                           obst["family"].get<std::string>()};
}

bool HypothesisReport::pass() const {
    if (!contraction_pass || !zero_coefficients_finite) return false;
    for (const auto& p : probes) {
        if (!p.pass) return false;
    }
    return true;
}

json HypothesisReport::to_json() const {
    json probes_json = json::array();
    for (const auto& p : probes) {
        probes_json.push_back({{"coefficient", p.coefficient},
                               {"variable", p.variable},
                               {"declared", p.declared},
                               {"empirical", p.empirical},
                               {"pass", p.pass}});
    }
    return {{"contraction_margin", contraction_margin},
            {"contraction_pass", contraction_pass},
            {"zero_coefficients_finite", zero_coefficients_finite},
            {"probe_count", probe_count},
            {"seed", seed},
            {"probes", probes_json},
            {"pass", pass()}};
}

HypothesisReport validate_hypotheses(const CoefficientSet& c, const SpaceTimeGrid& grid, std::size_t probe_count,
                                     std::uint64_t seed) {
    if (probe_count < 1) throw DomainError("validate_hypotheses: probe_count must be >= 1");
    const int d = grid.dim();
    const std::size_t d1 = static_cast<std::size_t>(c.d1);
    HypothesisReport report;
    report.probe_count = probe_count;
    report.seed = seed;
    report.contraction_margin = c.contraction_margin();
    report.contraction_pass = report.contraction_margin > 0.0;

    // Evaluates a coefficient as a vector so f, g and h share one probe loop.
    struct Target {
        const char* name;
        std::size_t width;
        double lz;
        std::function<void(double, const Point&, double, const Vec2&, std::span<double>)> eval;
    };
    const std::vector<Target> targets{
        {"f", 1, c.lip_C,
         [&](double t, const Point& x, double y, const Vec2& z, std::span<double> out) { out[0] = c.f(t, x, y, z); }},
        {"g", static_cast<std::size_t>(d), c.lip_alpha, c.g},
        {"h", d1, c.lip_beta, c.h},
    };

    auto rng = make_stream(seed, StreamTag::probes, 0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const Box dom = grid.domain();
    const double slack = 1.0 + 1e-9;

    for (const auto& tg : targets) {
        double ry = 0.0, rz = 0.0, rj = 0.0;
        std::vector<double> a(tg.width), b(tg.width), diff(tg.width);
        for (std::size_t p = 0; p < 4 * probe_count; ++p) {
            const int kind = static_cast<int>(p % 4);  // far, near, y-only, z-only
            const double t = unit(rng) * grid.horizon();
            Point x{};
            for (int ax = 0; ax < d; ++ax) x[ax] = dom.lower[ax] + unit(rng) * (dom.upper[ax] - dom.lower[ax]);
            const double y = 8.0 * unit(rng) - 4.0;
            Vec2 z{};
            for (int ax = 0; ax < d; ++ax) z[ax] = 8.0 * unit(rng) - 4.0;
            double y2 = 8.0 * unit(rng) - 4.0;
            Vec2 z2{};
            for (int ax = 0; ax < d; ++ax) z2[ax] = 8.0 * unit(rng) - 4.0;
            if (kind == 1) {
                y2 = y + 1e-4 * gauss(rng);
                for (int ax = 0; ax < d; ++ax) z2[ax] = z[ax] + 1e-4 * gauss(rng);
            } else if (kind == 2) {
                z2 = z;
            } else if (kind == 3) {
                y2 = y;
            }
            tg.eval(t, x, y, z, a);
            tg.eval(t, x, y2, z2, b);
            for (std::size_t i = 0; i < tg.width; ++i) diff[i] = a[i] - b[i];
            const double dv = norm(diff);
            const double dy = std::abs(y - y2);
            double dz = 0.0;
            for (int ax = 0; ax < d; ++ax) dz += (z[ax] - z2[ax]) * (z[ax] - z2[ax]);
            dz = std::sqrt(dz);
            if (kind == 2) ry = std::max(ry, ratio(dv, dy));
            if (kind == 3) rz = std::max(rz, ratio(dv, dz));
            rj = std::max(rj, ratio(dv, c.lip_C * dy + tg.lz * dz));
        }
        report.probes.push_back({tg.name, "y", c.lip_C, ry, ry <= c.lip_C * slack});
        report.probes.push_back({tg.name, "z", tg.lz, rz, rz <= tg.lz * slack});
        report.probes.push_back({tg.name, "joint", 1.0, rj, rj <= slack});
    }

    std::vector<double> gbuf(static_cast<std::size_t>(d)), hbuf(d1);
    const Vec2 zero{};
    for (std::size_t k = 0; k <= grid.time_steps() && report.zero_coefficients_finite; ++k) {
        const double t = grid.time(k);
        for (std::size_t n = 0; n < grid.nodes(); ++n) {
            const Point x = grid.point(n);
            bool ok = std::isfinite(c.f(t, x, 0.0, zero));
            c.g(t, x, 0.0, zero, gbuf);
            c.h(t, x, 0.0, zero, hbuf);
            for (double v : gbuf) ok = ok && std::isfinite(v);
            for (double v : hbuf) ok = ok && std::isfinite(v);
            if (!ok) {
                report.zero_coefficients_finite = false;
                break;
            }
        }
    }

    for (const auto& p : report.probes) {
        if (!p.pass) {
            std::ostringstream msg;
            msg << "coefficient " << p.coefficient << ": empirical Lipschitz ratio in " << p.variable << " = "
                << p.empirical << " exceeds declared " << p.declared;
            throw HypothesisViolation(p.coefficient, msg.str());
        }
    }
    return report;
}

namespace norms {

double l2(const SpaceTimeGrid& grid, std::span<const double> u, const std::vector<char>* mask) {
    if (u.size() != grid.nodes()) throw ShapeError("l2: field size");
    double s = 0.0;
    for (std::size_t n = 0; n < u.size(); ++n) {
        if (mask && !(*mask)[n]) continue;
        s += u[n] * u[n];
    }
    return std::sqrt(s * grid.cell_volume());
}

double h1_seminorm(const SpaceTimeGrid& grid, std::span<const double> u, const std::vector<char>* mask) {
    const std::size_t d = static_cast<std::size_t>(grid.dim());
    std::vector<double> grad(grid.nodes() * d);
    stencil::gradient(grid, u, grad);
    double s = 0.0;
    for (std::size_t n = 0; n < grid.nodes(); ++n) {
        if (mask && !(*mask)[n]) continue;
        for (std::size_t a = 0; a < d; ++a) s += grad[n * d + a] * grad[n * d + a];
    }
    return std::sqrt(s * grid.cell_volume());
}

double l2_2(const SpaceTimeGrid& grid, const SpaceTimeField& u, const std::vector<char>* mask) {
    double s = 0.0;
    for (std::size_t k = 0; k < grid.time_steps(); ++k) {
        const double v = l2(grid, u.slice(k), mask);
        s += grid.dt() * v * v;
    }
    return std::sqrt(s);
}

double t_norm(const SpaceTimeGrid& grid, const SpaceTimeField& u, const std::vector<char>* mask) {
    return DiscreteNorms::of(grid, u, mask).t_norm;
}

}  // namespace norms

DiscreteNorms DiscreteNorms::of(const SpaceTimeGrid& grid, const SpaceTimeField& u, const std::vector<char>* mask) {
    if (u.slices() != grid.time_steps() + 1 || u.nodes() != grid.nodes() || u.width() != 1) {
        throw ShapeError("norms: field must be scalar on the full space-time mesh");
    }
    DiscreteNorms out;
    double l22 = 0.0, h1 = 0.0;
    for (std::size_t k = 0; k <= grid.time_steps(); ++k) {
        const double l = norms::l2(grid, u.slice(k), mask);
        out.l2_sup = std::max(out.l2_sup, l);
        if (k < grid.time_steps()) {
            const double g = norms::h1_seminorm(grid, u.slice(k), mask);
            l22 += grid.dt() * l * l;
            h1 += grid.dt() * g * g;
        }
    }
    out.l2_2 = std::sqrt(l22);
    out.h1_integrated = std::sqrt(h1);
    out.t_norm = out.l2_sup + out.h1_integrated;
    return out;
}

}  // namespace ospde
