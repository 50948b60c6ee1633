#include "jdctrl/verify.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <sstream>

namespace jdctrl {

namespace {

// FNV-1a over the raw bytes of the inputs, rendered as hex.
class Digest {
public:
    Digest& add(double v) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof(bits));
        for (int i = 0; i < 8; ++i) {
            hash_ ^= (bits >> (8 * i)) & 0xFF;
            hash_ *= 0x100000001B3ull;
        }
        return *this;
    }
    Digest& add(const std::string& s) {
        for (unsigned char c : s) {
            hash_ ^= c;
            hash_ *= 0x100000001B3ull;
        }
        return *this;
    }
    std::string hex() const {
        std::ostringstream os;
        os << std::hex << hash_;
        return os.str();
    }

private:
    std::uint64_t hash_ = 0xCBF29CE484222325ull;
};

std::string format_number(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

} // namespace

std::string VerificationReport::summary_line() const {
    return std::string(pass ? "PASS" : "FAIL") + " " + name + ": " + narrative;
}

VerificationReport check_perturbation_bound(double rho_star, double rho_eps_star,
                                            double epsilon, double kappa_tilde,
                                            const VerifyTolerances& tol) {
    VerificationReport report;
    report.name = "perturbation-bound";
    report.inputs_digest =
        Digest().add(rho_star).add(rho_eps_star).add(epsilon).add(kappa_tilde).hex();

    const double upper = rho_star + epsilon * kappa_tilde * (1.0 + 2.0 * rho_star);
    const double slack = tol.perturbation_slack;
    report.measured["rho_star"] = rho_star;
    report.measured["rho_eps_star"] = rho_eps_star;
    report.measured["epsilon"] = epsilon;
    report.measured["kappa_tilde"] = kappa_tilde;
    report.measured["lower_gap"] = rho_eps_star - rho_star;
    report.measured["upper_gap"] = upper - rho_eps_star;
    report.thresholds["slack"] = slack;
    report.pass = rho_eps_star >= rho_star - slack && rho_eps_star <= upper + slack;
    report.narrative = "rho*=" + format_number(rho_star) +
                       " <= rho_eps*=" + format_number(rho_eps_star) +
                       " <= bound=" + format_number(upper) +
                       (report.pass ? "" : " VIOLATED, signed gaps (" +
                                               format_number(rho_eps_star - rho_star) + ", " +
                                               format_number(upper - rho_eps_star) + ")");
    return report;
}

VerificationReport cross_validate_policy(const ModelSpec& model,
                                         const ErgodicSolveResult& result,
                                         const Eigen::VectorXd& x0, double horizon,
                                         double burn_in, double step, std::uint64_t seed,
                                         int replications, int threads,
                                         const VerifyTolerances& tol) {
    VerificationReport report;
    report.name = "cross-validate-policy";
    report.inputs_digest = Digest()
                               .add(result.rho_star)
                               .add(horizon)
                               .add(burn_in)
                               .add(step)
                               .add(static_cast<double>(seed))
                               .add(static_cast<double>(replications))
                               .hex();

    const ErgodicEstimate estimate =
        estimate_ergodic_cost(model, ControlLaw::from_policy(result.policy), x0, horizon,
                              burn_in, step, seed, replications, threads);
    const double gap = std::abs(estimate.point_estimate - result.rho_star);
    const double allowance =
        3.0 * estimate.std_error + tol.cross_validation_rel * (1.0 + result.rho_star);
    report.measured["rho_star"] = result.rho_star;
    report.measured["rho_sim"] = estimate.point_estimate;
    report.measured["std_error"] = estimate.std_error;
    report.measured["gap"] = gap;
    report.measured["aborted_replications"] =
        static_cast<double>(estimate.aborted_replications);
    report.thresholds["allowance"] = allowance;
    report.pass = gap <= allowance && estimate.aborted_replications == 0;
    report.narrative = "|rho_sim - rho*| = " + format_number(gap) + " vs allowance " +
                       format_number(allowance) + " (3 SE + " +
                       format_number(tol.cross_validation_rel) + "(1+rho*))";
    return report;
}

VerificationReport check_truncation_convergence(const TruncationSweepResult& sweep,
                                                double rho_eps_star,
                                                const VerifyTolerances& tol) {
    VerificationReport report;
    report.name = "truncation-convergence";
    Digest digest;
    digest.add(rho_eps_star).add(sweep.epsilon);
    for (double r : sweep.radii) digest.add(r);
    for (double v : sweep.rho_values) digest.add(v);
    report.inputs_digest = digest.hex();

    bool nonincreasing = true;
    double worst_rise = 0.0;
    for (std::size_t i = 0; i + 1 < sweep.rho_values.size(); ++i) {
        const double rise = sweep.rho_values[i + 1] - sweep.rho_values[i];
        worst_rise = std::max(worst_rise, rise);
        if (rise > tol.truncation_monotone_slack) nonincreasing = false;
    }
    const double final_value = sweep.rho_values.back();
    const double final_gap = std::abs(final_value - rho_eps_star);
    const double final_allowance = tol.truncation_final_rel * (1.0 + std::abs(rho_eps_star));

    // smallest radius already within the sweep's epsilon of the unrestricted value
    double r_eps = sweep.radii.back();
    for (std::size_t i = 0; i < sweep.rho_values.size(); ++i) {
        if (sweep.rho_values[i] - rho_eps_star <= sweep.epsilon) {
            r_eps = sweep.radii[i];
            break;
        }
    }

    report.measured["final_value"] = final_value;
    report.measured["rho_eps_star"] = rho_eps_star;
    report.measured["final_gap"] = final_gap;
    report.measured["worst_rise"] = worst_rise;
    report.measured["epsilon_optimal_radius"] = r_eps;
    report.thresholds["monotone_slack"] = tol.truncation_monotone_slack;
    report.thresholds["final_allowance"] = final_allowance;
    report.pass = nonincreasing && final_gap <= final_allowance;
    report.narrative = std::string(nonincreasing ? "nonincreasing" : "NOT nonincreasing") +
                       ", final gap " + format_number(final_gap) + " vs " +
                       format_number(final_allowance) + ", eps-optimal radius " +
                       format_number(r_eps);
    return report;
}

VerificationReport check_assumptions(const ModelSpec& model, const AssumptionInputs& inputs,
                                     const Grid& grid, const VerifyTolerances& tol) {
    VerificationReport report;
    report.name = "foster-lyapunov-assumptions";
    report.inputs_digest = Digest()
                               .add(inputs.cone_delta)
                               .add(inputs.kappa_hat)
                               .add(inputs.ball_radius)
                               .add(static_cast<double>(grid.node_count()))
                               .hex();

    LyapunovCheckOptions cost_options;
    cost_options.form = DriftCondition::CostShaped;
    cost_options.cone_delta = inputs.cone_delta;
    cost_options.ball_radius = inputs.ball_radius;
    cost_options.coercive_floor = inputs.coercive_floor;
    const LyapunovReport cost_report =
        check_lyapunov(model, inputs.lyap_cost, AllControls{}, grid, cost_options);

    LyapunovCheckOptions policy_options;
    policy_options.form = DriftCondition::PolicyDrift;
    policy_options.ball_radius = inputs.ball_radius;
    policy_options.kappa_hat = inputs.kappa_hat;
    const LyapunovReport policy_report =
        check_lyapunov(model, inputs.lyap_policy, inputs.stabilizing_control, grid,
                       policy_options);

    auto shell_ok = [&](const LyapunovReport& r) {
        return r.violating_nodes == 0 ||
               r.stabilization_radius <= tol.stabilization_shell * r.max_tested_radius;
    };

    report.measured["cost_form_violation_fraction"] = cost_report.violation_fraction;
    report.measured["cost_form_stabilization_radius"] = cost_report.stabilization_radius;
    report.measured["policy_form_violation_fraction"] = policy_report.violation_fraction;
    report.measured["policy_form_stabilization_radius"] = policy_report.stabilization_radius;
    report.measured["max_tested_radius"] = cost_report.max_tested_radius;
    report.thresholds["stabilization_shell"] = tol.stabilization_shell;
    report.pass = shell_ok(cost_report) && shell_ok(policy_report);
    report.narrative = "violations stabilize at radius (" +
                       format_number(cost_report.stabilization_radius) + ", " +
                       format_number(policy_report.stabilization_radius) + ") of max " +
                       format_number(policy_report.max_tested_radius);
    return report;
}

} // namespace jdctrl
