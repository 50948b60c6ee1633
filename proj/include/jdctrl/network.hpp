#pragma once

#include "jdctrl/model.hpp"

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace jdctrl {

/// Parameters of the heavy-traffic limit of a multiclass multi-pool network:
/// drift b(x,u) = ell - M1 (x - <e,x>+ u^c) - <e,x>+ Gamma u^c + <e,x>- M2 u^s,
/// jumps along a fixed positive direction theta, and a running cost penalizing
/// queue length and idleness with exponent m.
struct NetworkParams {
    Eigen::VectorXd ell;
    Eigen::MatrixXd M1;         // lower triangular, positive diagonal
    Eigen::MatrixXd M2;         // d x J
    Eigen::VectorXd gamma;      // abandonment rates, diagonal of Gamma, >= 0
    Eigen::VectorXd theta;      // jump direction, > 0 componentwise
    double jump_rate = 0.0;     // total arrival rate of the compound Poisson input
    std::vector<std::pair<double, double>> jump_sizes; // (t_i, p_i), sum p_i = 1
    Eigen::VectorXd cost_queue; // c_i > 0
    Eigen::VectorXd cost_idle;  // s_j > 0
    double cost_exponent = 1.0; // m >= 1
    Eigen::VectorXd sigma_diag; // diagonal diffusion; defaults to all ones

    int dim() const { return static_cast<int>(ell.size()); }
    int pools() const { return static_cast<int>(M2.cols()); }

    JumpMeasure jump_measure() const;
    void validate() const;
};

/// 'V' network (single pool, J = 1): control space is the simplex in R^d.
ModelSpec build_v_model(const NetworkParams& params, int control_mesh = 8);

/// 'W' network (d = 3, J = 2): control space is ProductSimplex(3, 2).
ModelSpec build_w_model(const NetworkParams& params, int control_mesh = 8);

/// M1 and M2 of the 'W' network from its service rates.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> w_matrices(double mu11, double mu21,
                                                       double mu22, double mu32);

/// Numeric stand-in for the quadratic-form condition on the Lyapunov matrix:
/// lambda_min(Q M1 + M1^T Q) >= 8.
bool quadratic_form_check(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& M1);

} // namespace jdctrl
