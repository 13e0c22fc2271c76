#pragma once

#include <array>
#include <cstddef>
#include <memory>
#include <vector>

namespace rmkl {

/// Point in R^d, d <= 2. Unused coordinates stay zero.
using Point = std::array<double, 2>;

/// Truncated axis-aligned lattice on a box, dimensions 1 and 2.
///
/// Nodes sit at cell midpoints. Node indexing is row-major with axis 0
/// slowest: for d = 2, node i covers (i / n1, i % n1).
class Grid {
public:
    Grid(std::vector<double> lower, std::vector<double> upper,
         std::vector<int> nodes_per_axis);

    int dim() const { return dim_; }
    std::size_t node_count() const { return count_; }
    double cell_volume() const { return cell_volume_; }

    double lower(int axis) const { return lower_[axis]; }
    double upper(int axis) const { return upper_[axis]; }
    int nodes_per_axis(int axis) const { return nodes_[axis]; }
    double step(int axis) const { return step_[axis]; }

    /// Per-axis lattice index of node i.
    int axis_index(std::size_t i, int axis) const;
    /// Midpoint coordinate along `axis` of the axis cell with lattice index k.
    double axis_coord(int axis, int k) const { return lower_[axis] + (k + 0.5) * step_[axis]; }
    /// Coordinate of node i along `axis`.
    double coord(std::size_t i, int axis) const { return axis_coord(axis, axis_index(i, axis)); }
    Point node(std::size_t i) const;

    /// True when node i lies in the outermost cell layer of the box.
    bool on_boundary_layer(std::size_t i) const;

    bool same_as(const Grid& other) const;

private:
    int dim_;
    std::array<double, 2> lower_{}, upper_{}, step_{};
    std::array<int, 2> nodes_{};
    std::size_t count_ = 0;
    double cell_volume_ = 0.0;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(std::vector<double> lower, std::vector<double> upper,
                  std::vector<int> nodes_per_axis);

/// Convenience for cubic boxes: [lo, hi]^dim with n nodes per axis.
GridPtr make_grid(int dim, double lo, double hi, int n);

} // namespace rmkl
