#pragma once

#include "jdctrl/grid.hpp"
#include "jdctrl/model.hpp"

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace jdctrl {

/// Polynomial-growth Lyapunov candidate V(x) = g(x)^k where g agrees with
/// <x,Qx>^(1/2) outside the unit ball and is blended to a positive constant
/// near the origin so that V is C^2, convex and nonnegative everywhere.
///
/// The blend is radial in the Q-norm q = <x,Qx>^(1/2): g = chi(q) with
/// chi' a quintic smoothstep ramp on [q1/2, q1], q1 = sqrt(lambda_min(Q)),
/// so value, gradient and Hessian of V match <x,Qx>^(k/2) exactly wherever
/// |x| >= 1.
class LyapunovSpec {
public:
    LyapunovSpec() = default;
    LyapunovSpec(Eigen::VectorXd q_diag, double exponent);

    double exponent() const { return k_; }
    const Eigen::VectorXd& q_diag() const { return q_diag_; }

    double value(const Eigen::VectorXd& x) const;
    Eigen::VectorXd gradient(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd hessian(const Eigen::VectorXd& x) const;

    TestFunction as_test_function() const;

private:
    // chi and its first two derivatives at Q-radius q.
    void blend(double q, double& chi, double& dchi, double& d2chi) const;

    Eigen::VectorXd q_diag_;
    double k_ = 2.0;
    double ramp_lo_ = 0.0;  // blend starts (chi constant below)
    double ramp_hi_ = 0.0;  // blend ends (chi(q) = q above)
    double chi0_ = 0.0;     // constant value of chi on [0, ramp_lo]
};

/// Which Foster-Lyapunov inequality is being scanned.
enum class DriftCondition {
    CostShaped,  // A_u V(x) <= 1_{B0}(x) - F(x) for all u, on the cone complement
    PolicyDrift, // A_v V(x) <= kappa_hat 1_{B0}(x) - c(x, v(x)) on the whole region
};

struct AllControls {};

/// Control argument of the scan: every discretized control, one fixed control
/// index, or a grid policy.
using ControlSelection = std::variant<AllControls, int, PolicyField>;

struct LyapunovCheckOptions {
    DriftCondition form = DriftCondition::PolicyDrift;
    double cone_delta = 0.1;   // K_delta = {|<e,x>| > delta |x|}; CostShaped skips K_delta
    double ball_radius = 1.0;  // radius of B0
    double kappa_hat = 1.0;    // PolicyDrift bound inside B0
    std::function<double(const Eigen::VectorXd&)> coercive_floor; // F(x), CostShaped only
};

struct LyapunovRecord {
    std::size_t node = 0;
    int control = 0;
    double generator_value = 0.0;
    double bound = 0.0;
    bool satisfied = true;
};

struct LyapunovReport {
    std::vector<LyapunovRecord> records;
    std::size_t nodes_checked = 0;
    std::size_t violating_nodes = 0;
    double violation_fraction = 0.0;
    double max_violation = 0.0;          // max over records of (generator_value - bound)+
    double stabilization_radius = 0.0;   // max |x| over violating nodes (0 if none)
    double max_tested_radius = 0.0;
    bool violations_at_max_radius = false; // any violation with |x| >= 0.85 * max tested
};

/// Scans A_u V(x) against the selected drift inequality at every node of the
/// grid (restricted to the cone complement for the CostShaped form).
/// Violations are data, not errors.
LyapunovReport check_lyapunov(const ModelSpec& model, const LyapunovSpec& lyap,
                              const ControlSelection& control, const Grid& grid,
                              const LyapunovCheckOptions& options);

} // namespace jdctrl
