#include "rmkl/grid.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "rmkl/errors.hpp"

namespace rmkl {

Grid::Grid(std::vector<double> lower, std::vector<double> upper,
           std::vector<int> nodes_per_axis) {
    const std::size_t d = lower.size();
    if (d < 1 || d > 2)
        throw ConfigError("grid dimension must be 1 or 2");
    if (upper.size() != d || nodes_per_axis.size() != d)
        throw ConfigError("grid axis arrays must all have length dim");
    dim_ = static_cast<int>(d);
    count_ = 1;
    cell_volume_ = 1.0;
    for (int a = 0; a < dim_; ++a) {
        if (!(lower[a] < upper[a]) || !std::isfinite(lower[a]) || !std::isfinite(upper[a]))
            throw ConfigError("grid bounds must satisfy lower < upper on axis " + std::to_string(a));
        if (nodes_per_axis[a] < 2)
            throw ConfigError("grid needs at least 2 nodes per axis");
        lower_[a] = lower[a];
        upper_[a] = upper[a];
        nodes_[a] = nodes_per_axis[a];
        step_[a] = (upper[a] - lower[a]) / nodes_per_axis[a];
        count_ *= static_cast<std::size_t>(nodes_per_axis[a]);
        cell_volume_ *= step_[a];
    }
}

int Grid::axis_index(std::size_t i, int axis) const {
    if (dim_ == 1) return static_cast<int>(i);
    return axis == 0 ? static_cast<int>(i) / nodes_[1]
                     : static_cast<int>(i) % nodes_[1];
}

Point Grid::node(std::size_t i) const {
    Point p{0.0, 0.0};
    for (int a = 0; a < dim_; ++a) p[a] = coord(i, a);
    return p;
}

bool Grid::on_boundary_layer(std::size_t i) const {
    for (int a = 0; a < dim_; ++a) {
        const int k = axis_index(i, a);
        if (k == 0 || k == nodes_[a] - 1) return true;
    }
    return false;
}

bool Grid::same_as(const Grid& other) const {
    if (dim_ != other.dim_) return false;
    for (int a = 0; a < dim_; ++a)
        if (lower_[a] != other.lower_[a] || upper_[a] != other.upper_[a] ||
            nodes_[a] != other.nodes_[a])
            return false;
    return true;
}

GridPtr make_grid(std::vector<double> lower, std::vector<double> upper,
                  std::vector<int> nodes_per_axis) {
    return std::make_shared<const Grid>(std::move(lower), std::move(upper),
                                        std::move(nodes_per_axis));
}

GridPtr make_grid(int dim, double lo, double hi, int n) {
    std::vector<double> lower(dim, lo), upper(dim, hi);
    std::vector<int> nodes(dim, n);
    return make_grid(lower, upper, nodes);
}

} // namespace rmkl
