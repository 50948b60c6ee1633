// Command-line front end: configuration-driven solves, simulations, truncation
// sweeps and verification runs. Exit codes: 0 success, 1 config error,
// 2 nonconvergence, 3 verification failure.

#include "jdctrl/config.hpp"
#include "jdctrl/io.hpp"
#include "jdctrl/perturbation.hpp"
#include "jdctrl/sim.hpp"
#include "jdctrl/solver.hpp"
#include "jdctrl/verify.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

using namespace jdctrl;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNonconvergence = 2;
constexpr int kExitVerificationFailed = 3;

struct GlobalArgs {
    std::string config_path;
    std::string out_dir_override;
    int threads_override = 0;
    std::uint64_t seed_override = 0;
    bool has_seed_override = false;
};

RunConfig load_config(const GlobalArgs& args) {
    RunConfig config = RunConfig::from_file(args.config_path);
    if (!args.out_dir_override.empty()) config.out_dir = args.out_dir_override;
    if (args.threads_override > 0) config.threads = args.threads_override;
    if (args.has_seed_override) config.sim.seed = args.seed_override;
    return config;
}

json base_manifest(const RunConfig& config, const std::string& command) {
    json manifest;
    manifest["command"] = command;
    manifest["config"] = config.raw;
    manifest["effective"] = {{"out_dir", config.out_dir},
                             {"threads", config.threads},
                             {"seed", config.sim.seed}};
    return manifest;
}

void write_manifest(const RunConfig& config, const json& manifest) {
    write_file_atomic(config.out_dir + "/manifest.json", manifest.dump(2) + "\n");
}

Grid make_grid(const RunConfig& config, const ModelSpec& model) {
    return Grid(model.dim, config.grid.radius, config.grid.nodes);
}

/// Applies the configured epsilon-perturbation; records kappa_tilde.
ModelSpec apply_epsilon(const ModelSpec& model, const Grid& grid, double epsilon,
                        json& manifest) {
    if (epsilon == 0.0) return model;
    const PerturbedCostSpec spec = default_perturbation(model, grid, epsilon);
    manifest["perturbation"] = {{"epsilon", spec.epsilon},
                                {"kappa_tilde", spec.kappa_tilde}};
    return perturbed_model(model, spec);
}

int cmd_solve_discounted(const RunConfig& config) {
    const ModelSpec base = config.build_model();
    const Grid grid = make_grid(config, base);
    json manifest = base_manifest(config, "solve-discounted");
    const ModelSpec model = apply_epsilon(base, grid, config.solver.epsilon, manifest);

    const DiscountedSolveResult result =
        config.solver.boundary == "dirichlet"
            ? solve_discounted_dirichlet(model, grid, config.solver.alpha, config.solver.tol,
                                         config.solver.max_iter)
            : solve_discounted_clamped(model, grid, config.solver.alpha, config.solver.tol,
                                       config.solver.max_iter);

    write_file_atomic(config.out_dir + "/value_policy.csv",
                      value_policy_csv(grid, result.value, result.policy));
    manifest["results"] = {{"converged", result.converged},
                           {"iterations", result.iterations},
                           {"final_change", result.final_change},
                           {"alpha", config.solver.alpha},
                           {"boundary", config.solver.boundary}};
    write_manifest(config, manifest);
    if (!result.converged) {
        std::cerr << "solve-discounted: no convergence in " << config.solver.max_iter
                  << " iterations (final change " << result.final_change << ")\n";
        return kExitNonconvergence;
    }
    return kExitOk;
}

int cmd_solve_ergodic(const RunConfig& config) {
    const ModelSpec base = config.build_model();
    const Grid grid = make_grid(config, base);
    json manifest = base_manifest(config, "solve-ergodic");
    const ModelSpec model = apply_epsilon(base, grid, config.solver.epsilon, manifest);

    ErgodicSolveResult result;
    if (config.solver.method == "vanishing-discount") {
        const std::vector<double> schedule = config.solver.alpha_schedule.empty()
                                                 ? geometric_alpha_schedule()
                                                 : config.solver.alpha_schedule;
        result = vanishing_discount(model, grid, schedule, config.solver.tol,
                                    config.solver.max_iter);
        manifest["results"]["alpha_schedule"] = schedule;
        manifest["results"]["cauchy_increments"] = result.cauchy_increments;
        manifest["results"]["value_oscillations"] = result.value_oscillations;
    } else {
        result = solve_ergodic_pi(model, grid, config.solver.tol, config.solver.max_iter);
    }

    write_file_atomic(config.out_dir + "/value_policy.csv",
                      value_policy_csv(grid, result.value, result.policy));
    manifest["results"]["method"] = result.method;
    manifest["results"]["rho_star"] = result.rho_star;
    manifest["results"]["residual"] = result.residual;
    manifest["results"]["iterations"] = result.iterations;
    manifest["results"]["converged"] = result.converged;
    if (!result.diagnostic.empty()) manifest["results"]["diagnostic"] = result.diagnostic;
    write_manifest(config, manifest);
    if (!result.converged) {
        std::cerr << "solve-ergodic: " << (result.diagnostic.empty() ? "no convergence"
                                                                     : result.diagnostic)
                  << "\n";
        return kExitNonconvergence;
    }
    return kExitOk;
}

int cmd_simulate(const RunConfig& config) {
    const ModelSpec model = config.build_model();
    const Grid grid = make_grid(config, model);
    json manifest = base_manifest(config, "simulate");

    if (config.sim.control < 0 ||
        config.sim.control >= static_cast<int>(model.controls.size()))
        throw ConfigError("field \"config.sim.control\" out of range (model has " +
                          std::to_string(model.controls.size()) + " controls)");

    const ControlLaw law = ControlLaw::constant(config.sim.control);
    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.dim);
    SimParams params{.horizon = config.sim.horizon, .step = config.sim.step,
                     .seed = config.sim.seed};
    const Trajectory trajectory = simulate_path(model, law, x0, params);
    write_file_atomic(config.out_dir + "/trajectory.csv",
                      trajectory_csv(trajectory, model.dim));

    const OccupationHistogram histogram = empirical_measure(trajectory, grid);
    write_file_atomic(config.out_dir + "/histogram.csv", histogram_csv(histogram));
    manifest["results"]["jump_count"] = trajectory.jump_count;
    manifest["results"]["escaped_mass"] = histogram.escaped_mass;
    manifest["results"]["aborted"] = trajectory.aborted;
    if (trajectory.aborted) manifest["results"]["abort_reason"] = trajectory.abort_reason;

    if (config.sim.replications > 1) {
        const ErgodicEstimate estimate = estimate_ergodic_cost(
            model, law, x0, config.sim.horizon, config.sim.burn_in, config.sim.step,
            config.sim.seed, config.sim.replications, config.threads);
        manifest["results"]["ergodic_estimate"] = estimate.point_estimate;
        manifest["results"]["std_error"] = estimate.std_error;
        manifest["results"]["aborted_replications"] = estimate.aborted_replications;
    }
    write_manifest(config, manifest);
    return trajectory.aborted ? kExitNonconvergence : kExitOk;
}

int cmd_sweep(const RunConfig& config) {
    if (!config.sweep)
        throw ConfigError("missing field \"config.sweep\" for the sweep command");
    const ModelSpec base = config.build_model();
    const Grid grid = make_grid(config, base);
    json manifest = base_manifest(config, "sweep");
    const ModelSpec model = apply_epsilon(base, grid, config.solver.epsilon, manifest);

    if (config.sweep->outer_control < 0 ||
        config.sweep->outer_control >= static_cast<int>(model.controls.size()))
        throw ConfigError("field \"config.sweep.outer_control\" out of range");
    const PolicyField outer(grid, config.sweep->outer_control);
    const TruncationSweepResult sweep =
        truncation_sweep(model, grid, config.sweep->radii, outer, config.solver.epsilon,
                         config.solver.tol, config.solver.max_iter);

    write_file_atomic(config.out_dir + "/sweep.csv", sweep_csv(sweep));
    manifest["results"]["radii"] = sweep.radii;
    manifest["results"]["rho_values"] = sweep.rho_values;
    write_manifest(config, manifest);
    return kExitOk;
}

int cmd_verify(const RunConfig& config) {
    const ModelSpec model = config.build_model();
    const Grid grid = make_grid(config, model);
    json manifest = base_manifest(config, "verify");

    std::vector<VerificationReport> reports;

    const ErgodicSolveResult solved =
        solve_ergodic_pi(model, grid, config.solver.tol, config.solver.max_iter);
    if (!solved.converged) {
        std::cerr << "verify: ergodic solve failed: " << solved.diagnostic << "\n";
        return kExitNonconvergence;
    }
    manifest["results"]["rho_star"] = solved.rho_star;
    manifest["results"]["residual"] = solved.residual;

    const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(model.dim);
    reports.push_back(cross_validate_policy(model, solved, x0, config.sim.horizon,
                                            config.sim.burn_in, config.sim.step,
                                            config.sim.seed, config.sim.replications,
                                            config.threads));

    if (config.verify) {
        for (double eps : config.verify->epsilons) {
            if (eps == 0.0) continue;
            const PerturbedCostSpec spec = default_perturbation(model, grid, eps);
            const ModelSpec perturbed = perturbed_model(model, spec);
            const ErgodicSolveResult shifted =
                solve_ergodic_pi(perturbed, grid, config.solver.tol, config.solver.max_iter);
            reports.push_back(check_perturbation_bound(solved.rho_star, shifted.rho_star,
                                                       eps, spec.kappa_tilde));
        }
        if (config.verify->lyapunov) {
            const LyapunovConfig& lc = *config.verify->lyapunov;
            auto to_eigen = [](const std::vector<double>& v) {
                Eigen::VectorXd out(v.size());
                for (std::size_t i = 0; i < v.size(); ++i)
                    out[static_cast<Eigen::Index>(i)] = v[i];
                return out;
            };
            if (static_cast<int>(lc.q_cost.size()) != model.dim ||
                static_cast<int>(lc.q_policy.size()) != model.dim)
                throw ConfigError("fields \"config.verify.lyapunov.q_cost\"/\"q_policy\" "
                                  "must have model dimension");
            AssumptionInputs inputs;
            inputs.lyap_cost = LyapunovSpec(to_eigen(lc.q_cost), model.growth_degree);
            inputs.lyap_policy = LyapunovSpec(to_eigen(lc.q_policy), model.growth_degree);
            const double m = model.growth_degree;
            inputs.coercive_floor = [m](const Eigen::VectorXd& x) {
                return std::pow(x.norm(), m);
            };
            inputs.cone_delta = lc.delta;
            inputs.kappa_hat = lc.kappa_hat;
            inputs.ball_radius = lc.ball_radius;
            if (lc.stabilizing_control < 0 ||
                lc.stabilizing_control >= static_cast<int>(model.controls.size()))
                throw ConfigError(
                    "field \"config.verify.lyapunov.stabilizing_control\" out of range");
            inputs.stabilizing_control = lc.stabilizing_control;
            reports.push_back(check_assumptions(model, inputs, grid));
        }
    }

    if (config.sweep) {
        const PolicyField outer(grid, config.sweep->outer_control);
        const TruncationSweepResult sweep =
            truncation_sweep(model, grid, config.sweep->radii, outer, 0.0,
                             config.solver.tol, config.solver.max_iter);
        reports.push_back(check_truncation_convergence(sweep, solved.rho_star));
    }

    json report_array = json::array();
    std::string summary;
    bool all_pass = true;
    for (const auto& report : reports) {
        json entry;
        entry["name"] = report.name;
        entry["inputs_digest"] = report.inputs_digest;
        entry["measured"] = report.measured;
        entry["thresholds"] = report.thresholds;
        entry["pass"] = report.pass;
        entry["narrative"] = report.narrative;
        report_array.push_back(entry);
        summary += report.summary_line() + "\n";
        all_pass = all_pass && report.pass;
    }
    write_file_atomic(config.out_dir + "/verify_report.json", report_array.dump(2) + "\n");
    write_file_atomic(config.out_dir + "/verify_summary.txt", summary);
    manifest["results"]["all_pass"] = all_pass;
    write_manifest(config, manifest);
    std::cout << summary;
    return all_pass ? kExitOk : kExitVerificationFailed;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"ergodic and discounted control of jump diffusions: solve, simulate, verify"};
    app.require_subcommand(1);

    GlobalArgs args;
    int threads = 0;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "path to the JSON run configuration")
            ->required();
        sub->add_option("--out", args.out_dir_override, "output directory override");
        sub->add_option("--threads", threads, "worker threads for simulation replications");
        sub->add_option("--seed", seed, "simulation seed override");
    };

    CLI::App* solve_discounted =
        app.add_subcommand("solve-discounted", "discounted Dirichlet/whole-space solve");
    CLI::App* solve_ergodic =
        app.add_subcommand("solve-ergodic", "ergodic solve (policy iteration or "
                                            "vanishing discount)");
    CLI::App* simulate = app.add_subcommand("simulate", "Monte Carlo path simulation");
    CLI::App* sweep = app.add_subcommand("sweep", "spatial truncation sweep");
    CLI::App* verify = app.add_subcommand("verify", "cross-checks: simulation vs solver, "
                                                    "perturbation and truncation bounds");
    for (CLI::App* sub : {solve_discounted, solve_ergodic, simulate, sweep, verify})
        add_common(sub);

    CLI11_PARSE(app, argc, argv);

    try {
        for (CLI::App* sub : {solve_discounted, solve_ergodic, simulate, sweep, verify}) {
            if (!sub->parsed()) continue;
            if (threads > 0) args.threads_override = threads;
            if (sub->count("--seed") > 0) {
                args.seed_override = seed;
                args.has_seed_override = true;
            }
            const RunConfig config = load_config(args);
            if (sub == solve_discounted) return cmd_solve_discounted(config);
            if (sub == solve_ergodic) return cmd_solve_ergodic(config);
            if (sub == simulate) return cmd_simulate(config);
            if (sub == sweep) return cmd_sweep(config);
            return cmd_verify(config);
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNonconvergence;
    }
    return kExitConfig;
}
