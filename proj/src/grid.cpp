#include "jdctrl/grid.hpp"

#include <cmath>
#include <stdexcept>

namespace jdctrl {

Grid::Grid(int dim, double radius, int nodes_per_axis)
    : dim_(dim), radius_(radius), n_(nodes_per_axis) {
    if (dim < 1) throw std::invalid_argument("Grid: dim must be >= 1");
    if (radius <= 0.0) throw std::invalid_argument("Grid: radius must be > 0");
    if (n_ < 3 || n_ % 2 == 0)
        throw std::invalid_argument("Grid: nodes per axis must be odd and >= 3");
    spacing_ = 2.0 * radius_ / (n_ - 1);
    count_ = 1;
    for (int i = 0; i < dim_; ++i) count_ *= static_cast<std::size_t>(n_);
}

std::size_t Grid::flat_index(const std::vector<int>& multi) const {
    std::size_t flat = 0;
    for (int axis = 0; axis < dim_; ++axis)
        flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(multi[axis]);
    return flat;
}

std::vector<int> Grid::multi_index(std::size_t flat) const {
    std::vector<int> multi(dim_);
    for (int axis = dim_ - 1; axis >= 0; --axis) {
        multi[axis] = static_cast<int>(flat % static_cast<std::size_t>(n_));
        flat /= static_cast<std::size_t>(n_);
    }
    return multi;
}

Eigen::VectorXd Grid::node_point(std::size_t flat) const {
    Eigen::VectorXd x(dim_);
    for (int axis = dim_ - 1; axis >= 0; --axis) {
        x[axis] = axis_coordinate(static_cast<int>(flat % static_cast<std::size_t>(n_)));
        flat /= static_cast<std::size_t>(n_);
    }
    return x;
}

std::size_t Grid::origin_index() const {
    std::vector<int> multi(dim_, (n_ - 1) / 2);
    return flat_index(multi);
}

std::size_t Grid::nearest_node(const Eigen::VectorXd& x) const {
    std::size_t flat = 0;
    for (int axis = 0; axis < dim_; ++axis) {
        int idx = static_cast<int>(std::lround((x[axis] + radius_) / spacing_));
        idx = std::max(0, std::min(n_ - 1, idx));
        flat = flat * static_cast<std::size_t>(n_) + static_cast<std::size_t>(idx);
    }
    return flat;
}

bool Grid::contains(const Eigen::VectorXd& x) const {
    for (int axis = 0; axis < dim_; ++axis)
        if (x[axis] < -radius_ || x[axis] > radius_) return false;
    return true;
}

void Grid::interpolation_stencil(const Eigen::VectorXd& x,
                                 std::vector<std::pair<std::size_t, double>>& out) const {
    out.clear();
    std::vector<int> base(dim_);
    std::vector<double> frac(dim_);
    for (int axis = 0; axis < dim_; ++axis) {
        double t = (x[axis] + radius_) / spacing_;
        int idx = static_cast<int>(std::floor(t));
        idx = std::max(0, std::min(n_ - 2, idx));
        base[axis] = idx;
        double f = std::min(1.0, std::max(0.0, t - idx));
        // snap so node-aligned targets are exact lookups
        if (f < 1e-12) f = 0.0;
        else if (f > 1.0 - 1e-12) f = 1.0;
        frac[axis] = f;
    }
    const int corners = 1 << dim_;
    std::vector<int> multi(dim_);
    for (int c = 0; c < corners; ++c) {
        double weight = 1.0;
        for (int axis = 0; axis < dim_; ++axis) {
            const bool high = (c >> axis) & 1;
            multi[axis] = base[axis] + (high ? 1 : 0);
            weight *= high ? frac[axis] : 1.0 - frac[axis];
        }
        if (weight != 0.0) out.emplace_back(flat_index(multi), weight);
    }
}

double ValueField::interpolate(const Eigen::VectorXd& x) const {
    Eigen::VectorXd clamped = x;
    for (int axis = 0; axis < grid.dim(); ++axis)
        clamped[axis] = std::max(-grid.radius(), std::min(grid.radius(), clamped[axis]));
    std::vector<std::pair<std::size_t, double>> stencil;
    grid.interpolation_stencil(clamped, stencil);
    double v = 0.0;
    for (const auto& [node, w] : stencil) v += w * values[static_cast<Eigen::Index>(node)];
    return v;
}

} // namespace jdctrl
