#include "jdctrl/lyapunov.hpp"

#include <cmath>
#include <stdexcept>

namespace jdctrl {

LyapunovSpec::LyapunovSpec(Eigen::VectorXd q_diag, double exponent)
    : q_diag_(std::move(q_diag)), k_(exponent) {
    if ((q_diag_.array() <= 0.0).any())
        throw std::invalid_argument("LyapunovSpec: Q must be positive definite diagonal");
    if (k_ <= 0.0) throw std::invalid_argument("LyapunovSpec: exponent must be > 0");
    // g = chi(q) must equal q wherever |x| >= 1, so the ramp ends at the
    // smallest Q-radius attained on the unit sphere.
    ramp_hi_ = std::sqrt(q_diag_.minCoeff());
    ramp_lo_ = 0.5 * ramp_hi_;
    // chi' is the quintic smoothstep on [ramp_lo, ramp_hi]; its integral over
    // the ramp is half the ramp width, which fixes the constant chi0 so that
    // chi(ramp_hi) = ramp_hi exactly.
    chi0_ = ramp_hi_ - 0.5 * (ramp_hi_ - ramp_lo_);
}

void LyapunovSpec::blend(double q, double& chi, double& dchi, double& d2chi) const {
    if (q >= ramp_hi_) {
        chi = q;
        dchi = 1.0;
        d2chi = 0.0;
        return;
    }
    if (q <= ramp_lo_) {
        chi = chi0_;
        dchi = 0.0;
        d2chi = 0.0;
        return;
    }
    const double w = ramp_hi_ - ramp_lo_;
    const double t = (q - ramp_lo_) / w;
    // smoothstep ramp: chi' = t^3 (10 - 15 t + 6 t^2), nonnegative and
    // nondecreasing on [0,1], so chi stays convex.
    const double t3 = t * t * t;
    dchi = t3 * (10.0 - 15.0 * t + 6.0 * t * t);
    d2chi = 30.0 * t * t * (1.0 - t) * (1.0 - t) / w;
    // chi = chi0 + w * int_0^t ramp
    const double t4 = t3 * t;
    chi = chi0_ + w * (2.5 * t4 - 3.0 * t4 * t + t4 * t * t);
}

double LyapunovSpec::value(const Eigen::VectorXd& x) const {
    const double q2 = x.dot(q_diag_.cwiseProduct(x));
    const double q = std::sqrt(q2);
    double chi, dchi, d2chi;
    blend(q, chi, dchi, d2chi);
    return std::pow(chi, k_);
}

Eigen::VectorXd LyapunovSpec::gradient(const Eigen::VectorXd& x) const {
    const int d = static_cast<int>(x.size());
    const Eigen::VectorXd qx = q_diag_.cwiseProduct(x);
    const double q = std::sqrt(x.dot(qx));
    double chi, dchi, d2chi;
    blend(q, chi, dchi, d2chi);
    if (dchi == 0.0 || q == 0.0) return Eigen::VectorXd::Zero(d);
    // grad V = k chi^{k-1} chi'(q) * Qx / q
    return (k_ * std::pow(chi, k_ - 1.0) * dchi / q) * qx;
}

Eigen::MatrixXd LyapunovSpec::hessian(const Eigen::VectorXd& x) const {
    const int d = static_cast<int>(x.size());
    const Eigen::VectorXd qx = q_diag_.cwiseProduct(x);
    const double q = std::sqrt(x.dot(qx));
    double chi, dchi, d2chi;
    blend(q, chi, dchi, d2chi);
    if ((dchi == 0.0 && d2chi == 0.0) || q == 0.0) return Eigen::MatrixXd::Zero(d, d);

    // grad q = qx / q,  hess q = Q/q - qx qx^T / q^3
    const Eigen::VectorXd grad_q = qx / q;
    Eigen::MatrixXd hess_q = q_diag_.asDiagonal().toDenseMatrix() / q;
    hess_q.noalias() -= (qx * qx.transpose()) / (q * q * q);

    // g = chi(q): grad g = chi' grad q, hess g = chi'' grad q grad q^T + chi' hess q
    const Eigen::VectorXd grad_g = dchi * grad_q;
    const Eigen::MatrixXd hess_g = d2chi * (grad_q * grad_q.transpose()) + dchi * hess_q;

    const double gk1 = std::pow(chi, k_ - 1.0);
    const double gk2 = std::pow(chi, k_ - 2.0);
    return k_ * (k_ - 1.0) * gk2 * (grad_g * grad_g.transpose()) + k_ * gk1 * hess_g;
}

TestFunction LyapunovSpec::as_test_function() const {
    TestFunction f;
    LyapunovSpec copy = *this;
    f.value = [copy](const Eigen::VectorXd& x) { return copy.value(x); };
    f.gradient = [copy](const Eigen::VectorXd& x) { return copy.gradient(x); };
    f.hessian = [copy](const Eigen::VectorXd& x) { return copy.hessian(x); };
    return f;
}

LyapunovReport check_lyapunov(const ModelSpec& model, const LyapunovSpec& lyap,
                              const ControlSelection& control, const Grid& grid,
                              const LyapunovCheckOptions& options) {
    if (options.form == DriftCondition::CostShaped && !options.coercive_floor)
        throw std::invalid_argument("check_lyapunov: CostShaped form needs a coercive floor F");

    const TestFunction fn = lyap.as_test_function();
    LyapunovReport report;
    report.max_tested_radius = 0.0;

    std::vector<std::size_t> controls_at_node;
    const std::size_t node_count = grid.node_count();
    for (std::size_t node = 0; node < node_count; ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        const double r = x.norm();
        if (options.form == DriftCondition::CostShaped) {
            // inequality asserted on the complement of the cone K_delta
            const bool in_cone = std::abs(x.sum()) > options.cone_delta * r;
            if (in_cone) continue;
        }
        report.max_tested_radius = std::max(report.max_tested_radius, r);
        ++report.nodes_checked;

        const double indicator = r <= options.ball_radius ? 1.0 : 0.0;
        bool node_violates = false;

        auto check_one = [&](int control_index) {
            const Eigen::VectorXd& u = model.controls.point(control_index);
            const double gen = eval_generator(model, fn, x, u);
            double bound;
            if (options.form == DriftCondition::CostShaped)
                bound = indicator - options.coercive_floor(x);
            else
                bound = options.kappa_hat * indicator - model.cost(x, u);
            LyapunovRecord rec;
            rec.node = node;
            rec.control = control_index;
            rec.generator_value = gen;
            rec.bound = bound;
            rec.satisfied = gen <= bound;
            if (!rec.satisfied) {
                node_violates = true;
                report.max_violation = std::max(report.max_violation, gen - bound);
            }
            report.records.push_back(std::move(rec));
        };

        if (std::holds_alternative<AllControls>(control)) {
            for (std::size_t k = 0; k < model.controls.size(); ++k)
                check_one(static_cast<int>(k));
        } else if (std::holds_alternative<int>(control)) {
            check_one(std::get<int>(control));
        } else {
            check_one(std::get<PolicyField>(control).at(node));
        }

        if (node_violates) {
            ++report.violating_nodes;
            report.stabilization_radius = std::max(report.stabilization_radius, r);
        }
    }

    report.violation_fraction =
        report.nodes_checked == 0
            ? 0.0
            : static_cast<double>(report.violating_nodes) / report.nodes_checked;
    report.violations_at_max_radius =
        report.violating_nodes > 0 &&
        report.stabilization_radius >= 0.85 * report.max_tested_radius;
    return report;
}

} // namespace jdctrl
