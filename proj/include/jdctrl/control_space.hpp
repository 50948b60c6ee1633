#pragma once

#include <Eigen/Dense>

#include <vector>

namespace jdctrl {

enum class ControlKind { Simplex, ProductSimplex, FinitePoints };

/// Action set of the controlled problem together with a finite discretization.
///
/// Simplex(d_c) is {u >= 0, <e,u> = 1}; ProductSimplex(d_c, d_s) is the product
/// of two such simplices stored as one stacked vector (first d_c entries, then
/// d_s). FinitePoints is an explicit list. Discretized simplices use a uniform
/// lattice of mesh 1/mesh_n per coordinate.
class ControlSpace {
public:
    ControlSpace() = default; // empty; validate() rejects it until populated

    static ControlSpace simplex(int dim, int mesh_n = 8);
    static ControlSpace product_simplex(int dim_c, int dim_s, int mesh_n = 8);
    static ControlSpace finite_points(std::vector<Eigen::VectorXd> points);

    ControlKind kind() const { return kind_; }
    int dim_c() const { return dim_c_; }
    int dim_s() const { return dim_s_; }

    std::size_t size() const { return points_.size(); }
    const Eigen::VectorXd& point(std::size_t k) const { return points_.at(k); }
    const std::vector<Eigen::VectorXd>& points() const { return points_; }

    /// Index of the discretization point closest to u (Euclidean).
    std::size_t nearest_index(const Eigen::VectorXd& u) const;

    /// Throws std::invalid_argument naming the violated constraint.
    void validate() const;

private:
    ControlKind kind_ = ControlKind::FinitePoints;
    int dim_c_ = 0;
    int dim_s_ = 0;
    std::vector<Eigen::VectorXd> points_;
};

} // namespace jdctrl
