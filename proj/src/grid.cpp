#include "ospde/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "ospde/errors.hpp"

namespace ospde {

bool Box::contains(const Point& p) const {
    for (int a = 0; a < dim; ++a) {
        if (p[a] < lower[a] || p[a] > upper[a]) return false;
    }
    return true;
}

double Box::volume() const {
    double v = 1.0;
    for (int a = 0; a < dim; ++a) v *= std::max(0.0, upper[a] - lower[a]);
    return v;
}

SpaceTimeGrid::SpaceTimeGrid(std::vector<Axis> axes, std::size_t time_steps, double horizon,
                             double core_margin)
    : axes_(std::move(axes)), time_steps_(time_steps), horizon_(horizon) {
    if (axes_.empty() || axes_.size() > 2) throw ConfigError("grid: dim must be 1 or 2");
    if (time_steps_ < 1) throw ConfigError("grid: time_steps must be >= 1");
    if (!(horizon_ > 0.0) || !std::isfinite(horizon_)) throw ConfigError("grid: horizon must be > 0");
    nodes_ = 1;
    for (const auto& ax : axes_) {
        if (ax.nodes < 3) throw ConfigError("grid: every axis needs at least 3 nodes");
        if (!(ax.upper > ax.lower)) throw ConfigError("grid: axis upper bound must exceed lower bound");
        nodes_ *= ax.nodes;
    }
    core_margin_ = core_margin < 0.0 ? 3.0 * std::sqrt(horizon_) : core_margin;
    core_ = shrunk(core_margin_);
    for (int a = 0; a < dim(); ++a) {
        if (!(core_.upper[a] > core_.lower[a])) {
            throw ConfigError("grid: interior core is empty (domain narrower than 2 * core_margin = " +
                              std::to_string(2.0 * core_margin_) + ")");
        }
    }
}

double SpaceTimeGrid::cell_volume() const {
    double v = 1.0;
    for (const auto& ax : axes_) v *= ax.spacing();
    return v;
}

std::array<std::size_t, 2> SpaceTimeGrid::multi_index(std::size_t flat) const {
    const std::size_t nx = axes_[0].nodes;
    return {flat % nx, flat / nx};
}

Point SpaceTimeGrid::point(std::size_t flat) const {
    const auto idx = multi_index(flat);
    Point p{};
    for (int a = 0; a < dim(); ++a) p[a] = axis(a).coordinate(idx[a]);
    return p;
}

Box SpaceTimeGrid::domain() const { return shrunk(0.0); }

Box SpaceTimeGrid::shrunk(double guard) const {
    Box b;
    b.dim = dim();
    for (int a = 0; a < dim(); ++a) {
        b.lower[a] = axis(a).lower + guard;
        b.upper[a] = axis(a).upper - guard;
    }
    return b;
}

std::vector<char> SpaceTimeGrid::core_mask() const {
    std::vector<char> mask(nodes_, 0);
    for (std::size_t n = 0; n < nodes_; ++n) mask[n] = core_.contains(point(n)) ? 1 : 0;
    return mask;
}

double SpaceTimeGrid::interpolate(std::span<const double> field, const Point& p) const {
    return interpolate(field, p, 1, 0);
}

double SpaceTimeGrid::interpolate(std::span<const double> field, const Point& p, std::size_t width,
                                  std::size_t comp) const {
    std::array<long, 2> base{0, 0};
    std::array<double, 2> frac{0.0, 0.0};
    for (int a = 0; a < dim(); ++a) {
        const double s = (p[a] - axis(a).lower) / axis(a).spacing();
        const double fl = std::floor(s);
        base[a] = static_cast<long>(fl);
        frac[a] = s - fl;
    }
    auto value = [&](long i, long j) -> double {
        if (i < 0 || i >= static_cast<long>(axes_[0].nodes)) return 0.0;
        if (dim() == 2 && (j < 0 || j >= static_cast<long>(axes_[1].nodes))) return 0.0;
        const std::size_t node = flat(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
        return field[node * width + comp];
    };
    if (dim() == 1) {
        return (1.0 - frac[0]) * value(base[0], 0) + frac[0] * value(base[0] + 1, 0);
    }
    const double v00 = value(base[0], base[1]);
    const double v10 = value(base[0] + 1, base[1]);
    const double v01 = value(base[0], base[1] + 1);
    const double v11 = value(base[0] + 1, base[1] + 1);
    return (1.0 - frac[1]) * ((1.0 - frac[0]) * v00 + frac[0] * v10) +
           frac[1] * ((1.0 - frac[0]) * v01 + frac[0] * v11);
}

bool SpaceTimeGrid::operator==(const SpaceTimeGrid& other) const {
    if (axes_.size() != other.axes_.size()) return false;
    for (std::size_t a = 0; a < axes_.size(); ++a) {
        if (axes_[a].lower != other.axes_[a].lower || axes_[a].upper != other.axes_[a].upper ||
            axes_[a].nodes != other.axes_[a].nodes)
            return false;
    }
    return time_steps_ == other.time_steps_ && horizon_ == other.horizon_ &&
           core_margin_ == other.core_margin_;
}

bool SpaceTimeField::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace ospde
