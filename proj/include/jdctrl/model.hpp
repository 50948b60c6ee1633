#pragma once

#include "jdctrl/control_space.hpp"
#include "jdctrl/jump_measure.hpp"

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace jdctrl {

using DriftFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)>;
using DiffusionFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;
using CostFn = std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

/// A complete controlled jump-diffusion problem:
///   dX = b(X,U) dt + sigma(X) dW + dL,  L compensated compound Poisson,
/// with running cost c(x,u) >= 0 minimized in the long-run average sense.
struct ModelSpec {
    int dim = 0;
    DriftFn drift;          // b(x,u)
    DiffusionFn diffusion;  // sigma(x), nonsingular
    JumpMeasure jumps;
    CostFn cost;            // c(x,u) >= 0
    ControlSpace controls;
    int growth_degree = 2;  // polynomial degree bound m for cost / Lyapunov functions
    std::string name;

    /// a(x) = sigma sigma^T / 2.
    Eigen::MatrixXd diffusion_matrix(const Eigen::VectorXd& x) const;

    /// Generator drift of the compensated process: b(x,u) - mean_jump.
    Eigen::VectorXd compensated_drift(const Eigen::VectorXd& x, const Eigen::VectorXd& u) const;

    double cost_at(const Eigen::VectorXd& x, std::size_t control_index) const {
        return cost(x, controls.point(control_index));
    }
};

/// Scalar test function with analytic derivatives, for generator evaluation.
struct TestFunction {
    std::function<double(const Eigen::VectorXd&)> value;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&)> gradient;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> hessian;

    static TestFunction constant(double c, int dim);
    static TestFunction linear(const Eigen::VectorXd& p);
    static TestFunction quadratic(const Eigen::MatrixXd& H,
                                  const Eigen::VectorXd& p = Eigen::VectorXd());
    /// alpha*f + beta*g.
    static TestFunction combine(double alpha, const TestFunction& f,
                                double beta, const TestFunction& g);
};

/// Integro-differential generator applied to a smooth test function:
///   A_u phi(x) = a^{ij}(x) d_ij phi(x) + <b(x,u) - mean_jump, grad phi(x)>
///                + sum_i w_i (phi(x + z_i) - phi(x)).
double eval_generator(const ModelSpec& model, const TestFunction& fn,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& u);

} // namespace jdctrl
