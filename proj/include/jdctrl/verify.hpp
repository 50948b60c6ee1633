#pragma once

#include "jdctrl/lyapunov.hpp"
#include "jdctrl/model.hpp"
#include "jdctrl/sim.hpp"
#include "jdctrl/solver.hpp"

#include <map>
#include <string>
#include <vector>

namespace jdctrl {

/// Named constants used by every check; echoed into reports.
struct VerifyTolerances {
    double perturbation_slack = 1e-6;
    double truncation_monotone_slack = 1e-8;
    double truncation_final_rel = 1e-2;     // of (1 + rho_eps)
    double cross_validation_rel = 0.05;     // of (1 + rho*), added to 3 SE
    double stabilization_shell = 0.85;      // violations beyond this fraction of the
                                            // max tested radius fail the assumption check
};

struct VerificationReport {
    std::string name;
    std::string inputs_digest;
    std::map<std::string, double> measured;
    std::map<std::string, double> thresholds;
    bool pass = false;
    std::string narrative;

    std::string summary_line() const;
};

/// rho* <= rho_eps* <= rho* + eps kappa~ (1 + 2 rho*) + slack (slack on both sides).
VerificationReport check_perturbation_bound(double rho_star, double rho_eps_star,
                                            double epsilon, double kappa_tilde,
                                            const VerifyTolerances& tol = {});

/// Simulates the solved policy and compares the ergodic estimate with rho*:
/// pass iff |rho_sim - rho*| <= 3 SE + cross_validation_rel * (1 + rho*).
VerificationReport cross_validate_policy(const ModelSpec& model,
                                         const ErgodicSolveResult& result,
                                         const Eigen::VectorXd& x0, double horizon,
                                         double burn_in, double step, std::uint64_t seed,
                                         int replications, int threads = 1,
                                         const VerifyTolerances& tol = {});

/// Sweep values nonincreasing (within slack) and final within
/// truncation_final_rel * (1 + rho_eps*) of the unrestricted solve; also reports
/// the smallest radius whose value is within sweep.epsilon of rho_eps*.
VerificationReport check_truncation_convergence(const TruncationSweepResult& sweep,
                                                double rho_eps_star,
                                                const VerifyTolerances& tol = {});

struct AssumptionInputs {
    LyapunovSpec lyap_cost;               // V0 of the cost-shaped inequality
    std::function<double(const Eigen::VectorXd&)> coercive_floor; // F(x)
    double cone_delta = 0.1;
    LyapunovSpec lyap_policy;             // V of the policy-drift inequality
    ControlSelection stabilizing_control; // v_hat
    double kappa_hat = 1.0;
    double ball_radius = 1.0;
};

/// Wraps check_lyapunov for both drift inequalities; pass iff no violations
/// survive in the outer shell for either form.
VerificationReport check_assumptions(const ModelSpec& model, const AssumptionInputs& inputs,
                                     const Grid& grid, const VerifyTolerances& tol = {});

} // namespace jdctrl
