#pragma once

// Shared desk-scale fixtures used across the unit and acceptance suites.

#include "jdctrl/model.hpp"
#include "jdctrl/network.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace fixtures {

inline Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(v.size());
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

/// OU with jumps: dX = -X dt + dW + dL, cost x^2, no control.
/// Atoms +0.5 (rate 0.6) and -0.3 (rate 0.4): nu = 1, mean jump 0.18,
/// second moment 0.186; exact ergodic value (1 + 0.186)/2 = 0.593.
inline const std::vector<std::pair<double, double>>& ou_atoms() {
    static const std::vector<std::pair<double, double>> atoms = {{0.5, 0.6}, {-0.3, 0.4}};
    return atoms;
}

inline jdctrl::ModelSpec ou1d_model() {
    jdctrl::ModelSpec model;
    model.dim = 1;
    model.name = "ou1d";
    model.growth_degree = 2;
    model.controls = jdctrl::ControlSpace::finite_points({Eigen::VectorXd::Zero(1)});
    std::vector<jdctrl::JumpAtom> atoms;
    for (const auto& [z, w] : ou_atoms())
        atoms.push_back({Eigen::VectorXd::Constant(1, z), w});
    model.jumps = jdctrl::JumpMeasure(std::move(atoms));
    model.drift = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        return (-x).eval();
    };
    model.diffusion = [](const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(1, 1).eval();
    };
    model.cost = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) { return x[0] * x[0]; };
    return model;
}

/// Two actions in 1-D: action k pulls with rate pulls[k] at running charge
/// action_costs[k]; cost x^2 + charge. Single jump atom +0.4 at rate 0.5.
inline jdctrl::ModelSpec two_action_model() {
    const std::vector<double> pulls = {0.5, 1.5};
    const std::vector<double> charges = {0.0, 0.25};
    jdctrl::ModelSpec model;
    model.dim = 1;
    model.name = "twoaction1d";
    model.growth_degree = 2;
    model.controls = jdctrl::ControlSpace::finite_points(
        {Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0)});
    model.jumps = jdctrl::JumpMeasure({{Eigen::VectorXd::Constant(1, 0.4), 0.5}});
    model.drift = [pulls](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return Eigen::VectorXd::Constant(1, -pulls[static_cast<std::size_t>(u[0])] * x[0])
            .eval();
    };
    model.diffusion = [](const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(1, 1).eval();
    };
    model.cost = [charges](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return x[0] * x[0] + charges[static_cast<std::size_t>(u[0])];
    };
    return model;
}

/// 'V' network fixture, d = 2: class 2 abandons (gamma = (0,1)), unit service
/// rates, jumps along theta = (1,1) with sizes {0.2, 0.5} at total rate 0.5,
/// linear cost (m = 1). Control (0,1) is stabilizing; control (1,0) is the
/// transient constant control (Gamma u = 0 and <e, M^-1 ell~> > 0). Queueing
/// class 1 is cheap to hold but does not abandon, so the optimal policy trades
/// off holding cost against stability and is not constant in space.
inline jdctrl::NetworkParams v_params(double gamma1 = 0.0, double gamma2 = 1.0) {
    jdctrl::NetworkParams params;
    params.ell = vec({0.5, 0.25});
    params.M1 = Eigen::MatrixXd::Identity(2, 2);
    params.M2 = Eigen::MatrixXd::Zero(2, 1);
    params.gamma = vec({gamma1, gamma2});
    params.theta = vec({1.0, 1.0});
    params.jump_rate = 0.5;
    params.jump_sizes = {{0.2, 0.5}, {0.5, 0.5}};
    params.cost_queue = vec({1.0, 2.0});
    params.cost_idle = vec({1.0});
    params.cost_exponent = 1.0;
    return params;
}

inline jdctrl::ModelSpec v_model(int control_mesh = 8) {
    return jdctrl::build_v_model(v_params(), control_mesh);
}

/// Uniformly stable V variant: every class abandons (Gamma = I).
inline jdctrl::ModelSpec v_model_all_abandon(int control_mesh = 8) {
    return jdctrl::build_v_model(v_params(1.0, 1.0), control_mesh);
}

/// 'W' network fixture (d = 3, J = 2) with the service-rate matrices.
inline jdctrl::NetworkParams w_params() {
    jdctrl::NetworkParams params;
    auto [M1, M2] = jdctrl::w_matrices(1.0, 0.75, 1.25, 1.5);
    params.ell = vec({0.4, 0.2, 0.1});
    params.M1 = M1;
    params.M2 = M2;
    params.gamma = vec({0.0, 0.0, 1.0});
    params.theta = vec({1.0, 0.5, 0.5});
    params.jump_rate = 0.5;
    params.jump_sizes = {{0.3, 1.0}};
    params.cost_queue = vec({1.0, 2.0, 1.0});
    params.cost_idle = vec({1.0, 1.0});
    params.cost_exponent = 1.0;
    return params;
}

/// Control index of the simplex corner e_k in a mesh-n discretization.
inline int simplex_corner_index(const jdctrl::ControlSpace& controls, int coordinate) {
    Eigen::VectorXd target = Eigen::VectorXd::Zero(controls.dim_c());
    target[coordinate] = 1.0;
    return static_cast<int>(controls.nearest_index(target));
}

} // namespace fixtures
