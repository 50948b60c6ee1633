#pragma once

#include "jdctrl/grid.hpp"
#include "jdctrl/model.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace jdctrl {

/// Closure of the generator at the box boundary.
/// DirichletZero: unknowns are interior nodes; stencil and jump targets that
///   leave the interior contribute zero (the homogeneous Dirichlet problem).
/// Clamp: all nodes are unknowns; every stencil and interpolation target is
///   clamped to the nearest in-box node, so constants stay in the kernel.
enum class BoundaryMode { DirichletZero, Clamp };

/// Sparse finite-difference/quadrature discretization of A_u:
/// second-order central differences for a^{ij} d_ij (7-point pairwise stencil
/// for cross terms), central first differences for the compensated drift where
/// the monotonicity budget a^{ii} - sum_{j!=i} |a^{ij}| >= h |b~^i| / 2 allows,
/// first-order upwind otherwise, and exact atom quadrature with multilinear
/// interpolation for the nonlocal part.
struct DiscretizedGenerator {
    Eigen::SparseMatrix<double> op;    // active x active, row i ~ (A psi)(x_i)
    std::vector<std::size_t> active_to_node;
    std::vector<long> node_to_active;  // -1 where the node is not an unknown
    BoundaryMode mode = BoundaryMode::Clamp;
    bool monotone = true;              // diffusion-dominance check passed at all nodes
    double max_lost_jump_mass = 0.0;   // Dirichlet: largest per-row truncated jump rate
};

/// Row of the operator at one node under one control, as (active column, coeff)
/// pairs. Used for assembly, pointwise argmin sweeps and residuals.
class GeneratorRowBuilder {
public:
    GeneratorRowBuilder(const ModelSpec& model, const Grid& grid, BoundaryMode mode);

    /// Appends the row entries for node `node` under control point u.
    /// Returns the truncated (zero-extended) jump mass of the row.
    double build(std::size_t node, const Eigen::VectorXd& u,
                 std::vector<std::pair<std::size_t, double>>& entries) const;

    /// (A psi)(x_node) for a full-grid field psi.
    double apply(std::size_t node, const Eigen::VectorXd& u, const Eigen::VectorXd& psi) const;

    /// Monotonicity budget check at one node/control.
    bool diffusion_dominant(std::size_t node, const Eigen::VectorXd& u) const;

    const Grid& grid() const { return grid_; }

private:
    const ModelSpec& model_;
    Grid grid_;
    BoundaryMode mode_;
};

/// Assembles the full operator for one control everywhere or a grid policy.
DiscretizedGenerator discretize_generator(const ModelSpec& model, const Grid& grid,
                                          const Eigen::VectorXd& u, BoundaryMode mode);
DiscretizedGenerator discretize_generator(const ModelSpec& model, const Grid& grid,
                                          const PolicyField& policy, BoundaryMode mode);

} // namespace jdctrl
