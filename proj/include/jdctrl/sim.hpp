#pragma once

#include "jdctrl/grid.hpp"
#include "jdctrl/model.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace jdctrl {

/// Feedback law mapping states to indices into ControlSpace.discretization.
struct ControlLaw {
    std::function<int(const Eigen::VectorXd&)> index_at;

    static ControlLaw constant(int control_index);
    static ControlLaw from_policy(PolicyField policy);
};

struct Trajectory {
    std::vector<double> times;
    std::vector<Eigen::VectorXd> states;
    std::vector<int> controls_applied;   // per step, size = times.size() - 1
    std::vector<double> cost_integral;   // running integral, aligned with times
    long jump_count = 0;
    bool aborted = false;
    std::string abort_reason;

    double horizon() const { return times.empty() ? 0.0 : times.back(); }
    double total_cost() const { return cost_integral.empty() ? 0.0 : cost_integral.back(); }
};

struct SimParams {
    double horizon = 1.0;     // T
    double step = 1e-2;       // h
    std::uint64_t seed = 1;
};

/// Euler-Maruyama with compensated compound Poisson jumps:
///   X' = X + b(X,u) h + sigma(X) sqrt(h) xi - h * mean_jump + jumps in (t, t+h].
/// Jump arrivals follow a persistent exponential clock of rate nu; sizes are
/// drawn from the atoms with probabilities w_i / nu. Warns on stderr when
/// nu * h >= 0.1. Non-finite states abort the path with a time diagnostic.
Trajectory simulate_path(const ModelSpec& model, const ControlLaw& policy,
                         const Eigen::VectorXd& x0, const SimParams& params);

struct WeakGeneratorReport {
    double h = 0.0;
    double discrepancy = 0.0;  // (mean phi(X_h) - phi(x))/h - A_u phi(x)
    double std_error = 0.0;    // Monte Carlo SE of the discrepancy
    double generator_value = 0.0;
    double one_step_mean = 0.0;
    long samples = 0;
};

/// One-step weak error of the scheme against eval_generator. Meaningful for
/// test functions of polynomial growth at most growth_degree + 2.
WeakGeneratorReport weak_generator_check(const ModelSpec& model, const TestFunction& fn,
                                         const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                         double h, long n_samples, std::uint64_t seed = 1);

struct ErgodicEstimate {
    double point_estimate = 0.0; // mean over replications of time-averaged cost
    double std_error = 0.0;
    int replications = 0;
    int aborted_replications = 0;
    double horizon = 0.0;
    double burn_in = 0.0;
    std::vector<double> replication_averages;
};

/// Per replication: (cost(T) - cost(burn_in)) / (T - burn_in); replications are
/// seeded seed + replication_index and may run concurrently, reduced in
/// replication order.
ErgodicEstimate estimate_ergodic_cost(const ModelSpec& model, const ControlLaw& policy,
                                      const Eigen::VectorXd& x0, double horizon,
                                      double burn_in, double step, std::uint64_t seed,
                                      int replications, int threads = 1);

struct OccupationHistogram {
    Grid grid;
    Eigen::VectorXd cell_masses;  // one per node-centered cell
    double escaped_mass = 0.0;    // fraction of time outside the cell hull
    double horizon = 0.0;
};

/// Time-weighted cell occupancy of the path (marginal on states;
/// cells are the node-centered boxes of width spacing()).
OccupationHistogram empirical_measure(const Trajectory& trajectory, const Grid& grid);

} // namespace jdctrl
