#include "jdctrl/sim.hpp"

#include "jdctrl/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <thread>

namespace jdctrl {

ControlLaw ControlLaw::constant(int control_index) {
    ControlLaw law;
    law.index_at = [control_index](const Eigen::VectorXd&) { return control_index; };
    return law;
}

ControlLaw ControlLaw::from_policy(PolicyField policy) {
    ControlLaw law;
    law.index_at = [policy = std::move(policy)](const Eigen::VectorXd& x) {
        return policy.lookup(x);
    };
    return law;
}

namespace {

struct StepContext {
    const ModelSpec* model = nullptr;
    Eigen::VectorXd mean_jump;
    double nu = 0.0;
    std::vector<double> atom_cdf; // cumulative rates, last entry = nu
    double next_arrival = 0.0;
};

StepContext make_context(const ModelSpec& model, CounterRng& rng) {
    StepContext ctx;
    ctx.model = &model;
    ctx.nu = model.jumps.total_mass();
    ctx.mean_jump = model.jumps.empty() ? Eigen::VectorXd::Zero(model.dim).eval()
                                        : model.jumps.mean_jump();
    double acc = 0.0;
    for (const auto& atom : model.jumps.atoms()) {
        acc += atom.w;
        ctx.atom_cdf.push_back(acc);
    }
    ctx.next_arrival = ctx.nu > 0.0 ? rng.exponential(ctx.nu)
                                    : std::numeric_limits<double>::infinity();
    return ctx;
}

const Eigen::VectorXd& draw_atom(const StepContext& ctx, CounterRng& rng) {
    const double v = rng.uniform() * ctx.nu;
    const auto it = std::lower_bound(ctx.atom_cdf.begin(), ctx.atom_cdf.end(), v);
    const std::size_t idx = std::min<std::size_t>(ctx.atom_cdf.size() - 1,
                                                  it - ctx.atom_cdf.begin());
    return ctx.model->jumps.atoms()[idx].z;
}

// One Euler-Maruyama step of size dt from (t, x); fires every compound Poisson
// arrival whose clock lands in (t, t + dt]. Returns the number of jumps applied.
int euler_step(StepContext& ctx, CounterRng& rng, double t, double dt,
               const Eigen::VectorXd& u, Eigen::VectorXd& x) {
    const ModelSpec& model = *ctx.model;
    const int d = model.dim;
    Eigen::VectorXd xi(d);
    for (int i = 0; i < d; ++i) xi[i] = rng.normal();

    Eigen::VectorXd next = x + model.drift(x, u) * dt +
                           model.diffusion(x) * (std::sqrt(dt) * xi);
    if (ctx.nu > 0.0) next -= dt * ctx.mean_jump;

    int jumps = 0;
    while (ctx.next_arrival <= t + dt) {
        next += draw_atom(ctx, rng);
        ctx.next_arrival += rng.exponential(ctx.nu);
        ++jumps;
    }
    x = std::move(next);
    return jumps;
}

void warn_step_size(const ModelSpec& model, double h) {
    const double nu = model.jumps.total_mass();
    if (nu * h >= 0.1)
        std::cerr << "[jdctrl] warning: nu * h = " << nu * h
                  << " >= 0.1; jump scheduling accuracy degrades\n";
}

} // namespace

Trajectory simulate_path(const ModelSpec& model, const ControlLaw& policy,
                         const Eigen::VectorXd& x0, const SimParams& params) {
    if (params.step <= 0.0) throw std::invalid_argument("simulate_path: step h must be > 0");
    if (params.horizon < params.step)
        throw std::invalid_argument("simulate_path: horizon T must be >= h");
    warn_step_size(model, params.step);

    CounterRng rng(params.seed);
    StepContext ctx = make_context(model, rng);

    Trajectory traj;
    const std::size_t steps_hint = static_cast<std::size_t>(params.horizon / params.step) + 2;
    traj.times.reserve(steps_hint);
    traj.states.reserve(steps_hint);
    traj.controls_applied.reserve(steps_hint);
    traj.cost_integral.reserve(steps_hint);

    double t = 0.0;
    Eigen::VectorXd x = x0;
    double cost_acc = 0.0;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    traj.cost_integral.push_back(0.0);

    while (t < params.horizon) {
        const double dt = std::min(params.step, params.horizon - t);
        const int k = policy.index_at(x);
        const Eigen::VectorXd& u = model.controls.point(k);
        cost_acc += model.cost(x, u) * dt;
        traj.jump_count += euler_step(ctx, rng, t, dt, u, x);
        t += dt;
        if (!x.allFinite()) {
            traj.aborted = true;
            traj.abort_reason = "non-finite state at t = " + std::to_string(t);
            break;
        }
        traj.times.push_back(t);
        traj.states.push_back(x);
        traj.controls_applied.push_back(k);
        traj.cost_integral.push_back(cost_acc);
    }
    return traj;
}

WeakGeneratorReport weak_generator_check(const ModelSpec& model, const TestFunction& fn,
                                         const Eigen::VectorXd& x, const Eigen::VectorXd& u,
                                         double h, long n_samples, std::uint64_t seed) {
    if (h <= 0.0) throw std::invalid_argument("weak_generator_check: h must be > 0");
    WeakGeneratorReport report;
    report.h = h;
    report.samples = n_samples;
    report.generator_value = eval_generator(model, fn, x, u);

    const double phi0 = fn.value(x);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (long s = 0; s < n_samples; ++s) {
        CounterRng rng(seed + static_cast<std::uint64_t>(s));
        StepContext ctx = make_context(model, rng);
        Eigen::VectorXd xs = x;
        euler_step(ctx, rng, 0.0, h, u, xs);
        const double v = fn.value(xs);
        sum += v;
        sum_sq += v * v;
    }
    const double n = static_cast<double>(n_samples);
    const double mean = sum / n;
    const double var = std::max(0.0, sum_sq / n - mean * mean) * n / std::max(1.0, n - 1.0);
    report.one_step_mean = mean;
    report.discrepancy = (mean - phi0) / h - report.generator_value;
    report.std_error = std::sqrt(var / n) / h;
    return report;
}

namespace {

struct ReplicationResult {
    double average = 0.0;
    bool aborted = false;
};

ReplicationResult run_replication(const ModelSpec& model, const ControlLaw& policy,
                                  const Eigen::VectorXd& x0, double horizon, double burn_in,
                                  double step, std::uint64_t seed) {
    CounterRng rng(seed);
    StepContext ctx = make_context(model, rng);

    double t = 0.0;
    Eigen::VectorXd x = x0;
    double cost_acc = 0.0;
    double cost_at_burn_in = 0.0;
    bool burn_recorded = burn_in <= 0.0;

    ReplicationResult out;
    while (t < horizon) {
        const double dt = std::min(step, horizon - t);
        const int k = policy.index_at(x);
        const Eigen::VectorXd& u = model.controls.point(k);
        cost_acc += model.cost(x, u) * dt;
        euler_step(ctx, rng, t, dt, u, x);
        t += dt;
        if (!x.allFinite()) {
            out.aborted = true;
            return out;
        }
        if (!burn_recorded && t >= burn_in) {
            cost_at_burn_in = cost_acc;
            burn_recorded = true;
        }
    }
    out.average = (cost_acc - cost_at_burn_in) / (horizon - burn_in);
    return out;
}

} // namespace

ErgodicEstimate estimate_ergodic_cost(const ModelSpec& model, const ControlLaw& policy,
                                      const Eigen::VectorXd& x0, double horizon,
                                      double burn_in, double step, std::uint64_t seed,
                                      int replications, int threads) {
    if (burn_in < 0.0 || horizon <= burn_in)
        throw std::invalid_argument("estimate_ergodic_cost: need horizon T > burn_in >= 0");
    if (replications < 1)
        throw std::invalid_argument("estimate_ergodic_cost: replications must be >= 1");
    warn_step_size(model, step);

    std::vector<ReplicationResult> results(replications);
    const int workers = std::max(1, std::min(threads, replications));
    if (workers == 1) {
        for (int r = 0; r < replications; ++r)
            results[r] = run_replication(model, policy, x0, horizon, burn_in, step,
                                         seed + static_cast<std::uint64_t>(r));
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&]() {
                for (int r = next.fetch_add(1); r < replications; r = next.fetch_add(1))
                    results[r] = run_replication(model, policy, x0, horizon, burn_in, step,
                                                 seed + static_cast<std::uint64_t>(r));
            });
        }
        for (auto& th : pool) th.join();
    }

    ErgodicEstimate estimate;
    estimate.horizon = horizon;
    estimate.burn_in = burn_in;
    estimate.replications = replications;
    // deterministic reduction in replication order
    for (const auto& r : results) {
        if (r.aborted) {
            ++estimate.aborted_replications;
            continue;
        }
        estimate.replication_averages.push_back(r.average);
    }
    const std::size_t n = estimate.replication_averages.size();
    if (n == 0) return estimate;
    double mean = 0.0;
    for (double v : estimate.replication_averages) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : estimate.replication_averages) var += (v - mean) * (v - mean);
    var = n > 1 ? var / static_cast<double>(n - 1) : 0.0;
    estimate.point_estimate = mean;
    estimate.std_error = std::sqrt(var / static_cast<double>(n));
    return estimate;
}

OccupationHistogram empirical_measure(const Trajectory& trajectory, const Grid& grid) {
    if (trajectory.times.size() < 2)
        throw std::invalid_argument("empirical_measure: trajectory horizon must be > 0");

    OccupationHistogram hist;
    hist.grid = grid;
    hist.cell_masses = Eigen::VectorXd::Zero(grid.node_count());
    hist.horizon = trajectory.horizon();

    const double half_cell = 0.5 * grid.spacing();
    const double hull = grid.radius() + half_cell;
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < trajectory.times.size(); ++s) {
        const double dt = trajectory.times[s + 1] - trajectory.times[s];
        const Eigen::VectorXd& x = trajectory.states[s];
        total += dt;
        bool inside = true;
        for (int axis = 0; axis < grid.dim(); ++axis)
            if (std::abs(x[axis]) > hull) { inside = false; break; }
        if (inside)
            hist.cell_masses[static_cast<Eigen::Index>(grid.nearest_node(x))] += dt;
    }
    hist.cell_masses /= total;
    // escaped mass defined against the same summation so the masses identity
    // holds to rounding
    hist.escaped_mass = std::max(0.0, 1.0 - hist.cell_masses.sum());
    return hist;
}

} // namespace jdctrl
