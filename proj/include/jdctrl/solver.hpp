#pragma once

#include "jdctrl/fd_operator.hpp"
#include "jdctrl/grid.hpp"
#include "jdctrl/model.hpp"
#include "jdctrl/perturbation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jdctrl {

struct DiscountedSolveResult {
    ValueField value;   // psi, zero at Dirichlet boundary nodes
    PolicyField policy;
    int iterations = 0;
    bool converged = false;
    double final_change = 0.0;
};

struct ErgodicSolveResult {
    double rho_star = 0.0;
    ValueField value;    // normalized: value at the origin node is exactly 0
    PolicyField policy;
    double residual = 0.0; // max |min_u[A_u V + c](x) - rho*| over nodes
    int iterations = 0;
    std::string method;  // "vanishing-discount" | "policy-iteration"
    bool converged = false;
    std::string diagnostic;
    std::vector<double> cauchy_increments;  // vanishing-discount only
    std::vector<double> value_oscillations; // osc of V~ per alpha, qualitative monitor
    std::vector<double> rho_iterates;       // policy-iteration only
};

struct TruncationSweepResult {
    std::vector<double> radii;
    std::vector<double> rho_values;
    std::string outer_control_tag;
    double epsilon = 0.0;
};

struct SolverError {
    std::string message;
};

/// Solve-box preconditions: sigma(x) nonsingular (|det| bounded away from 0)
/// and cost >= 0, checked at every grid node. Throws std::invalid_argument.
void validate_model_on_grid(const ModelSpec& model, const Grid& grid);

/// Policy iteration for the discounted Dirichlet problem on the grid box:
///   min_u [A_u psi + c^eps] = alpha psi inside, psi = 0 outside.
/// epsilon enters through the cost of `model` (pass a perturbed model).
DiscountedSolveResult solve_discounted_dirichlet(const ModelSpec& model, const Grid& grid,
                                                 double alpha, double tol = 1e-9,
                                                 int max_iter = 200);

/// Discounted solve with the clamp closure on all nodes (whole-space equation).
DiscountedSolveResult solve_discounted_clamped(const ModelSpec& model, const Grid& grid,
                                               double alpha, double tol = 1e-9,
                                               int max_iter = 200,
                                               const PolicyField* warm_start = nullptr);

/// Vanishing-discount approximation of the ergodic problem: solves the clamped
/// discounted equation along the alpha schedule, reports rho = alpha V(0) at
/// the final alpha and the normalized value V - V(0). Flags nonconvergence when
/// the Cauchy increments max|V~_{k+1} - V~_k| grow across the last three alphas.
ErgodicSolveResult vanishing_discount(const ModelSpec& model, const Grid& grid,
                                      const std::vector<double>& alpha_schedule,
                                      double tol = 1e-9, int max_iter = 200);

/// Default schedule 0.5, 0.25, ... down to (and including the first term <=) alpha_min.
std::vector<double> geometric_alpha_schedule(double first = 0.5, double factor = 0.5,
                                             double alpha_min = 1e-3);

/// Poisson-equation evaluation of one policy on the clamped grid chain:
/// solves A_v h - rho = -c_v with h(origin) = 0.
/// Returns SolverError-like nullopt with the message when the linear system is
/// singular (the policy's chain is not unichain on the grid).
struct PolicyEvaluation {
    double rho = 0.0;
    ValueField h;
};
std::optional<PolicyEvaluation> policy_evaluate(const ModelSpec& model, const Grid& grid,
                                                const PolicyField& policy,
                                                std::string* error = nullptr);

/// Howard policy iteration for the ergodic HJB on the clamped grid:
/// alternates policy evaluation with pointwise argmin improvement
/// (ties to the lowest control index). `frozen` nodes keep their current
/// control during improvement (used by the truncation sweep).
ErgodicSolveResult solve_ergodic_pi(const ModelSpec& model, const Grid& grid,
                                    double tol = 1e-9, int max_iter = 60,
                                    const PolicyField* initial = nullptr,
                                    const std::vector<bool>* frozen = nullptr);

/// Greedy selector from a value field: argmin_u [A_u V(x) + c(x,u)] per node.
PolicyField extract_policy(const ModelSpec& model, const Grid& grid, const ValueField& value,
                           BoundaryMode mode = BoundaryMode::Clamp);

/// Spatial truncation sweep: for each radius R, improvement is restricted to
/// the outer control at nodes with |x| > R and free inside.
TruncationSweepResult truncation_sweep(const ModelSpec& model, const Grid& grid,
                                       const std::vector<double>& radii,
                                       const PolicyField& outer_control, double epsilon,
                                       double tol = 1e-9, int max_iter = 60);

/// Max-norm ergodic HJB residual of (value, rho) on the clamped grid.
double hjb_residual(const ModelSpec& model, const Grid& grid, const ValueField& value,
                    double rho);

} // namespace jdctrl
