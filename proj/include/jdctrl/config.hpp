#pragma once

#include "jdctrl/model.hpp"
#include "jdctrl/network.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jdctrl {

/// Thrown on malformed configuration; the message names the offending field.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& message) : std::runtime_error(message) {}
};

struct GridConfig {
    double radius = 4.0;
    int nodes = 81;
};

struct SolverConfig {
    double alpha = 0.2;                 // discounted Dirichlet command
    std::vector<double> alpha_schedule; // empty: geometric default down to 1e-3
    double epsilon = 0.0;
    double tol = 1e-9;
    int max_iter = 60;
    std::string method = "policy-iteration"; // or "vanishing-discount"
    std::string boundary = "clamp";          // or "dirichlet" (discounted only)
};

struct SimConfig {
    double horizon = 100.0;
    double burn_in = 0.0;
    double step = 0.01;
    std::uint64_t seed = 1;
    int replications = 1;
    int control = 0; // constant control index for cmd_simulate
};

struct SweepConfig {
    std::vector<double> radii;
    int outer_control = 0; // constant control index frozen outside the ball
};

struct LyapunovConfig {
    std::vector<double> q_cost;   // diagonal of Q for the cost-shaped inequality
    std::vector<double> q_policy; // diagonal of Q~ for the policy-drift inequality
    double kappa_hat = 10.0;
    double delta = 0.1;
    double ball_radius = 1.0;
    int stabilizing_control = 0;
};

struct VerifyConfig {
    std::vector<double> epsilons;
    std::optional<LyapunovConfig> lyapunov;
};

struct RunConfig {
    nlohmann::json raw; // full parsed config, echoed into manifests
    GridConfig grid;
    SolverConfig solver;
    SimConfig sim;
    std::optional<SweepConfig> sweep;
    std::optional<VerifyConfig> verify;
    std::string out_dir = "out";
    int threads = 1;

    /// Parses and strictly validates; unknown keys and malformed values raise
    /// ConfigError naming the field.
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig from_file(const std::string& path);

    ModelSpec build_model() const;
    std::string model_builder() const;
};

} // namespace jdctrl
