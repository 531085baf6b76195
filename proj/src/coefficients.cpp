#include "ospde/coefficients.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "ospde/errors.hpp"

namespace ospde {

namespace {

using nlohmann::json;

// Reads a family description and rejects parameters outside `allowed`.
class Params {
public:
    Params(const json& spec, std::string role) : spec_(spec), role_(std::move(role)) {
        if (!spec_.is_object()) throw ConfigError(role_ + ": expected an object");
        if (!spec_.contains("family") || !spec_["family"].is_string()) {
            throw ConfigError(role_ + ": missing string key 'family'");
        }
        family_ = spec_["family"].get<std::string>();
    }

    const std::string& family() const { return family_; }

    void allow(std::initializer_list<const char*> keys) const {
        std::set<std::string> ok{"family"};
        for (const char* k : keys) ok.insert(k);
        for (const auto& [key, value] : spec_.items()) {
            if (!ok.count(key)) throw ConfigError(role_ + " (" + family_ + "): unknown parameter '" + key + "'");
        }
    }

    double number(const char* key, double fallback) const {
        if (!spec_.contains(key)) return fallback;
        if (!spec_[key].is_number()) throw ConfigError(role_ + ": parameter '" + key + "' must be a number");
        const double v = spec_[key].get<double>();
        if (!std::isfinite(v)) throw ConfigError(role_ + ": parameter '" + key + "' must be finite");
        return v;
    }

    Point point(const char* key, int dim) const {
        Point p{0.0, 0.0};
        if (!spec_.contains(key)) return p;
        const json& v = spec_[key];
        if (v.is_number()) {
            for (int a = 0; a < dim; ++a) p[a] = v.get<double>();
            return p;
        }
        if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
            throw ConfigError(role_ + ": parameter '" + std::string(key) + "' must be a number or a length-" +
                              std::to_string(dim) + " array");
        }
        for (int a = 0; a < dim; ++a) p[a] = v[static_cast<std::size_t>(a)].get<double>();
        return p;
    }

    [[noreturn]] void unknown() const { throw ConfigError(role_ + ": unknown family '" + family_ + "'"); }

private:
    const json& spec_;
    std::string role_;
    std::string family_;
};

double sq_dist(const Point& x, const Point& c, int dim) {
    double r2 = 0.0;
    for (int a = 0; a < dim; ++a) r2 += (x[a] - c[a]) * (x[a] - c[a]);
    return r2;
}

// Normalized sum of gradient components; 1-Lipschitz in |z| by Cauchy-Schwarz.
double zsum(const Vec2& z, int dim) {
    return dim == 1 ? z[0] : (z[0] + z[1]) / std::numbers::sqrt2;
}

ScalarCoefficient make_f(const json& spec, int dim) {
    const Params p(spec, "coefficients.f");
    const std::string& fam = p.family();
    if (fam == "zero") {
        p.allow({});
        return [](double, const Point&, double, const Vec2&) { return 0.0; };
    }
    if (fam == "constant") {
        p.allow({"value"});
        const double c = p.number("value", 0.0);
        return [c](double, const Point&, double, const Vec2&) { return c; };
    }
    if (fam == "bump") {
        p.allow({"amplitude", "center", "width"});
        const double amp = p.number("amplitude", 1.0);
        const Point c = p.point("center", dim);
        const double w = p.number("width", 0.25);
        if (!(w > 0.0)) throw ConfigError("coefficients.f (bump): width must be > 0");
        return [=](double, const Point& x, double, const Vec2&) {
            return amp * std::exp(-sq_dist(x, c, dim) / (2.0 * w * w));
        };
    }
    if (fam == "sine" || fam == "linear") {
        p.allow({"offset", "y_coeff", "z_coeff"});
        const double c0 = p.number("offset", 0.0);
        const double a = p.number("y_coeff", 0.0);
        const double b = p.number("z_coeff", 0.0);
        if (fam == "sine") {
            return [=](double, const Point&, double y, const Vec2& z) {
                return c0 + a * std::sin(y) + b * std::sin(zsum(z, dim));
            };
        }
        return [=](double, const Point&, double y, const Vec2& z) { return c0 + a * y + b * zsum(z, dim); };
    }
    p.unknown();
}

VectorCoefficient make_g(const json& spec, int dim) {
    const Params p(spec, "coefficients.g");
    const std::string& fam = p.family();
    if (fam == "zero") {
        p.allow({});
        return [](double, const Point&, double, const Vec2&, std::span<double> out) {
            for (double& o : out) o = 0.0;
        };
    }
    if (fam == "linear_gradient") {
        p.allow({"alpha"});
        const double alpha = p.number("alpha", 0.0);
        return [=](double, const Point&, double, const Vec2& z, std::span<double> out) {
            for (int a = 0; a < dim; ++a) out[a] = alpha * z[a];
        };
    }
    if (fam == "sine") {
        p.allow({"alpha", "y_coeff"});
        const double alpha = p.number("alpha", 0.0);
        const double c = p.number("y_coeff", 0.0) / std::sqrt(static_cast<double>(dim));
        return [=](double, const Point&, double y, const Vec2& z, std::span<double> out) {
            for (int a = 0; a < dim; ++a) out[a] = alpha * std::sin(z[a]) + c * std::sin(y);
        };
    }
    if (fam == "bump_primitive") {
        // g_1(x) = amplitude * int_{-inf}^{x_1} exp(-(s-c)^2 / 2w^2) ds, so div g is a bump in x_1.
        p.allow({"amplitude", "center", "width"});
        const double amp = p.number("amplitude", 1.0);
        const double c = p.number("center", 0.0);
        const double w = p.number("width", 0.25);
        if (!(w > 0.0)) throw ConfigError("coefficients.g (bump_primitive): width must be > 0");
        const double scale = amp * w * std::sqrt(2.0 * std::numbers::pi);
        return [=](double, const Point& x, double, const Vec2&, std::span<double> out) {
            out[0] = scale * 0.5 * std::erfc(-(x[0] - c) / (w * std::numbers::sqrt2));
            if (dim == 2) out[1] = 0.0;
        };
    }
    p.unknown();
}

VectorCoefficient make_h(const json& spec, int dim, int d1) {
    const Params p(spec, "coefficients.h");
    const std::string& fam = p.family();
    const double split = 1.0 / std::sqrt(static_cast<double>(d1));
    if (fam == "zero") {
        p.allow({});
        return [](double, const Point&, double, const Vec2&, std::span<double> out) {
            for (double& o : out) o = 0.0;
        };
    }
    if (fam == "constant") {
        p.allow({"sigma"});
        const double s = p.number("sigma", 0.0) * split;
        return [=](double, const Point&, double, const Vec2&, std::span<double> out) {
            for (double& o : out) o = s;
        };
    }
    if (fam == "sine" || fam == "linear") {
        p.allow({"offset", "y_coeff", "z_coeff"});
        const double c0 = p.number("offset", 0.0);
        const double a = p.number("y_coeff", 0.0);
        const double b = p.number("z_coeff", 0.0);
        const bool sine = fam == "sine";
        return [=](double, const Point&, double y, const Vec2& z, std::span<double> out) {
            const double zs = zsum(z, dim);
            const double v = sine ? c0 + a * std::sin(y) + b * std::sin(zs) : c0 + a * y + b * zs;
            for (double& o : out) o = v * split;
        };
    }
    p.unknown();
}

std::string family_of(const json& block, const char* key) {
    if (!block.contains(key)) return "zero";
    const json& s = block[key];
    if (!s.is_object() || !s.contains("family") || !s["family"].is_string()) {
        throw ConfigError(std::string("coefficients.") + key + ": missing string key 'family'");
    }
    return s["family"].get<std::string>();
}

}  // namespace

CoefficientSet make_coefficients(const json& block, int dim) {
    if (!block.is_object()) throw ConfigError("coefficients: expected an object");
    for (const auto& [key, value] : block.items()) {
        if (key != "f" && key != "g" && key != "h" && key != "noise_dim" && key != "lipschitz") {
            throw ConfigError("coefficients: unknown key '" + key + "'");
        }
    }
    CoefficientSet c;
    c.dim = dim;
    c.d1 = block.value("noise_dim", 1);
    if (c.d1 < 1) throw ConfigError("coefficients: noise_dim must be >= 1");

    const json zero = {{"family", "zero"}};
    c.f = make_f(block.contains("f") ? block["f"] : zero, dim);
    c.g = make_g(block.contains("g") ? block["g"] : zero, dim);
    c.h = make_h(block.contains("h") ? block["h"] : zero, dim, c.d1);
    c.f_family = family_of(block, "f");
    c.g_family = family_of(block, "g");
    c.h_family = family_of(block, "h");

    if (block.contains("lipschitz")) {
        const json& lip = block["lipschitz"];
        if (!lip.is_object()) throw ConfigError("coefficients.lipschitz: expected an object");
        for (const auto& [key, value] : lip.items()) {
            if (key != "C" && key != "alpha" && key != "beta") {
                throw ConfigError("coefficients.lipschitz: unknown key '" + key + "'");
            }
            if (!value.is_number()) throw ConfigError("coefficients.lipschitz." + key + " must be a number");
        }
        c.lip_C = lip.value("C", 0.0);
        c.lip_alpha = lip.value("alpha", 0.0);
        c.lip_beta = lip.value("beta", 0.0);
    }
    if (c.lip_C < 0.0 || c.lip_alpha < 0.0 || c.lip_beta < 0.0) {
        throw ConfigError("coefficients.lipschitz: declared constants must be nonnegative");
    }
    return c;
}

SpaceTimeFunction make_space_time_function(const json& spec, int dim, const std::string& role) {
    const Params p(spec, role);
    const std::string& fam = p.family();
    if (fam == "zero") {
        p.allow({});
        return [](double, const Point&) { return 0.0; };
    }
    if (fam == "none") {
        p.allow({});
        return [](double, const Point&) { return kNoObstacle; };
    }
    if (fam == "constant") {
        p.allow({"value"});
        const double c = p.number("value", 0.0);
        return [c](double, const Point&) { return c; };
    }
    if (fam == "put") {
        p.allow({"strike"});
        const double k = p.number("strike", 1.0);
        return [k](double, const Point& x) { return std::max(k - std::exp(x[0]), 0.0); };
    }
    if (fam == "bump") {
        p.allow({"amplitude", "center", "width"});
        const double amp = p.number("amplitude", 1.0);
        const Point c = p.point("center", dim);
        const double w = p.number("width", 0.25);
        if (!(w > 0.0)) throw ConfigError(role + " (bump): width must be > 0");
        return [=](double, const Point& x) { return amp * std::exp(-sq_dist(x, c, dim) / (2.0 * w * w)); };
    }
    if (fam == "wave") {
        p.allow({"amplitude", "frequency", "rate", "offset"});
        const double amp = p.number("amplitude", 1.0);
        const double freq = p.number("frequency", 1.0);
        const double rate = p.number("rate", 0.0);
        const double off = p.number("offset", 0.0);
        return [=](double t, const Point& x) { return off + amp * std::sin(freq * x[0] + rate * t); };
    }
    if (fam == "time_linear") {
        p.allow({"slope", "offset"});
        const double slope = p.number("slope", 1.0);
        const double off = p.number("offset", 0.0);
        return [=](double t, const Point&) { return off + slope * t; };
    }
    p.unknown();
}

}  // namespace ospde
