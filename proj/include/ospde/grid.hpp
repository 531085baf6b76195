#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace ospde {

/// Spatial point or gradient. Only the first `dim` components are meaningful.
using Point = std::array<double, 2>;
using Vec2 = std::array<double, 2>;

/// Spatial field on the grid nodes, row-major with the first axis fastest.
using Field = std::vector<double>;

struct Axis {
    double lower = 0.0;
    double upper = 1.0;
    std::size_t nodes = 3;

    double spacing() const { return (upper - lower) / static_cast<double>(nodes - 1); }
    double coordinate(std::size_t i) const { return lower + spacing() * static_cast<double>(i); }
};

/// Axis-aligned box, used for the interior core and the path validity region.
struct Box {
    Point lower{};
    Point upper{};
    int dim = 1;

    bool contains(const Point& p) const;
    double volume() const;
};

/**
 * Truncated rectangular domain in 1 or 2 space dimensions together with a
 * uniform time mesh t_k = k * dt, k = 0..time_steps.
 *
 * Boundary convention: homogeneous Dirichlet data sit on ghost nodes one
 * spacing beyond each face, so every grid node is an unknown.
 *
 * The interior core is the box shrunk by `core_margin` on every face
 * (default 3 * sqrt(T)). Identities and comparisons are asserted there.
 */
class SpaceTimeGrid {
public:
    SpaceTimeGrid(std::vector<Axis> axes, std::size_t time_steps, double horizon,
                  double core_margin = -1.0);

    int dim() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
    std::size_t nodes() const { return nodes_; }
    std::size_t nodes_along(int a) const { return axis(a).nodes; }
    std::size_t time_steps() const { return time_steps_; }
    double horizon() const { return horizon_; }
    double dt() const { return horizon_ / static_cast<double>(time_steps_); }
    double dx(int a = 0) const { return axis(a).spacing(); }
    /// Product of the spacings (Δx^d).
    double cell_volume() const;
    double time(std::size_t k) const { return dt() * static_cast<double>(k); }

    std::size_t flat(std::size_t i, std::size_t j = 0) const { return i + j * axes_[0].nodes; }
    std::array<std::size_t, 2> multi_index(std::size_t flat) const;
    Point point(std::size_t flat) const;

    double core_margin() const { return core_margin_; }
    const Box& core() const { return core_; }
    Box domain() const;
    /// Domain shrunk by `guard` on every face.
    Box shrunk(double guard) const;
    /// 1 on nodes inside the core (closed box), 0 elsewhere.
    std::vector<char> core_mask() const;

    /// Multilinear interpolation of a nodal field. Points outside the grid see
    /// the zero Dirichlet ghost values.
    double interpolate(std::span<const double> field, const Point& p) const;
    /// Interpolate component `comp` of an interleaved vector field with `width`
    /// components per node.
    double interpolate(std::span<const double> field, const Point& p, std::size_t width,
                       std::size_t comp) const;

    bool operator==(const SpaceTimeGrid& other) const;

private:
    std::vector<Axis> axes_;
    std::size_t time_steps_;
    double horizon_;
    double core_margin_;
    std::size_t nodes_;
    Box core_;
};

/// Real-valued field on the whole space-time mesh: slices k = 0..nt, each
/// holding `width` values per node.
class SpaceTimeField {
public:
    SpaceTimeField() = default;
    SpaceTimeField(std::size_t slices, std::size_t nodes, std::size_t width = 1, double value = 0.0)
        : slices_(slices), nodes_(nodes), width_(width), data_(slices * nodes * width, value) {}

    static SpaceTimeField on(const SpaceTimeGrid& grid, std::size_t width = 1, double value = 0.0) {
        return SpaceTimeField(grid.time_steps() + 1, grid.nodes(), width, value);
    }

    std::size_t slices() const { return slices_; }
    std::size_t nodes() const { return nodes_; }
    std::size_t width() const { return width_; }
    std::size_t slice_size() const { return nodes_ * width_; }

    std::span<double> slice(std::size_t k) { return {data_.data() + k * slice_size(), slice_size()}; }
    std::span<const double> slice(std::size_t k) const {
        return {data_.data() + k * slice_size(), slice_size()};
    }
    double& at(std::size_t k, std::size_t node, std::size_t comp = 0) {
        return data_[k * slice_size() + node * width_ + comp];
    }
    double at(std::size_t k, std::size_t node, std::size_t comp = 0) const {
        return data_[k * slice_size() + node * width_ + comp];
    }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    bool all_finite() const;

private:
    std::size_t slices_ = 0;
    std::size_t nodes_ = 0;
    std::size_t width_ = 1;
    std::vector<double> data_;
};

}  // namespace ospde
