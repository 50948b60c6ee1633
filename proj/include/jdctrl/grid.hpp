#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace jdctrl {

/// Uniform tensor grid on the box [-R, R]^d with n nodes per axis.
/// n is odd so that the origin is a node. Nodes are indexed lexicographically,
/// last axis fastest.
class Grid {
public:
    Grid() = default;
    Grid(int dim, double radius, int nodes_per_axis);

    int dim() const { return dim_; }
    double radius() const { return radius_; }
    int nodes_per_axis() const { return n_; }
    double spacing() const { return spacing_; }
    std::size_t node_count() const { return count_; }

    std::size_t flat_index(const std::vector<int>& multi) const;
    std::vector<int> multi_index(std::size_t flat) const;

    Eigen::VectorXd node_point(std::size_t flat) const;
    double axis_coordinate(int idx) const { return -radius_ + spacing_ * idx; }

    std::size_t origin_index() const;

    /// Nearest node, clamping to the box when x lies outside.
    std::size_t nearest_node(const Eigen::VectorXd& x) const;

    bool contains(const Eigen::VectorXd& x) const;

    /// Multilinear interpolation stencil for a point inside the box:
    /// 2^d (node, weight) pairs. Precondition: contains(x).
    void interpolation_stencil(const Eigen::VectorXd& x,
                               std::vector<std::pair<std::size_t, double>>& out) const;

    bool operator==(const Grid& other) const {
        return dim_ == other.dim_ && radius_ == other.radius_ && n_ == other.n_;
    }

private:
    int dim_ = 0;
    double radius_ = 0.0;
    int n_ = 0;
    double spacing_ = 0.0;
    std::size_t count_ = 0;
};

/// One scalar per grid node.
struct ValueField {
    Grid grid;
    Eigen::VectorXd values;

    ValueField() = default;
    explicit ValueField(const Grid& g) : grid(g), values(Eigen::VectorXd::Zero(g.node_count())) {}

    double at(std::size_t node) const { return values[static_cast<Eigen::Index>(node)]; }
    bool all_finite() const { return values.allFinite(); }

    /// Value at an arbitrary point by multilinear interpolation (clamped outside).
    double interpolate(const Eigen::VectorXd& x) const;
};

/// One control index per grid node.
struct PolicyField {
    Grid grid;
    std::vector<int> control_index;

    PolicyField() = default;
    explicit PolicyField(const Grid& g, int fill = 0)
        : grid(g), control_index(g.node_count(), fill) {}

    int at(std::size_t node) const { return control_index[node]; }

    /// Control index at an arbitrary point: nearest grid node, nearest
    /// boundary node when outside the box.
    int lookup(const Eigen::VectorXd& x) const { return control_index[grid.nearest_node(x)]; }
};

} // namespace jdctrl
