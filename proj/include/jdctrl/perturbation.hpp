#pragma once

#include "jdctrl/grid.hpp"
#include "jdctrl/model.hpp"

#include <functional>

namespace jdctrl {

/// Coercive perturbation c^eps = c + eps F_tilde used to regularize costs that
/// vanish on a hyperplane. kappa_tilde is the sandwich constant
/// F_tilde <= kappa_tilde (1_{B0} + c 1_{Ktilde} + F 1_{Ktilde^c}).
struct PerturbedCostSpec {
    double epsilon = 0.0;                                  // in [0, 1/kappa_tilde)
    std::function<double(const Eigen::VectorXd&)> F_tilde; // coercive, >= c
    double kappa_tilde = 1.0;                              // >= 1
};

/// Same dynamics, cost replaced by c + eps * F_tilde.
ModelSpec perturbed_model(const ModelSpec& model, const PerturbedCostSpec& spec);

/// Default construction on a solve grid: F_tilde(x) = C_F (1 + |x|^m) with
/// C_F = 1.1 * max over nodes and controls of c/(1+|x|^m), and kappa_tilde
/// measured as the smallest constant making the sandwich hold on the grid
/// with K_tilde = (K_delta x A) + {c > F}, F(x) = |x|^m.
PerturbedCostSpec default_perturbation(const ModelSpec& model, const Grid& grid,
                                       double epsilon, double cone_delta = 0.1,
                                       double ball_radius = 1.0);

} // namespace jdctrl
