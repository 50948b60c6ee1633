#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

#include "jdctrl/sim.hpp"

#include <cmath>
#include <cstring>

using namespace jdctrl;
using fixtures::vec;

namespace {

ModelSpec frozen_model(JumpMeasure jumps = JumpMeasure()) {
    ModelSpec model;
    model.dim = 2;
    model.controls = ControlSpace::finite_points({Eigen::VectorXd::Zero(2)});
    model.jumps = std::move(jumps);
    model.drift = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(2).eval();
    };
    model.diffusion = [](const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Zero(2, 2).eval();
    };
    model.cost = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        return 3.0 + x.squaredNorm() * 0.0;
    };
    return model;
}

} // namespace

TEST_CASE("frozen dynamics stay put and integrate a constant cost exactly") {
    const ModelSpec model = frozen_model();
    SimParams params{.horizon = 2.5, .step = 0.01, .seed = 42};
    const Trajectory traj = simulate_path(model, ControlLaw::constant(0), vec({1.0, -2.0}), params);
    REQUIRE_FALSE(traj.aborted);
    CHECK(traj.jump_count == 0);
    for (const auto& state : traj.states) {
        CHECK(state[0] == 1.0);
        CHECK(state[1] == -2.0);
    }
    CHECK(traj.total_cost() == doctest::Approx(3.0 * 2.5).epsilon(1e-12));
    CHECK_THROWS_AS(simulate_path(model, ControlLaw::constant(0), vec({0.0, 0.0}),
                                  SimParams{.horizon = 1.0, .step = -0.1, .seed = 1}),
                    std::invalid_argument);
}

TEST_CASE("compensated jumps are a martingale: E[X_T] = x0") {
    const ModelSpec model = frozen_model(JumpMeasure({{vec({0.4, 0.2}), 0.8}}));
    const Eigen::VectorXd x0 = vec({0.5, -0.5});
    const int reps = 100000;
    const double horizon = 1.0;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd sum_sq = Eigen::VectorXd::Zero(2);
    for (int r = 0; r < reps; ++r) {
        SimParams params{.horizon = horizon, .step = 0.01,
                         .seed = 1000 + static_cast<std::uint64_t>(r)};
        const Trajectory traj = simulate_path(model, ControlLaw::constant(0), x0, params);
        const Eigen::VectorXd delta = traj.states.back() - x0;
        sum += delta;
        sum_sq += delta.cwiseProduct(delta);
    }
    for (int i = 0; i < 2; ++i) {
        const double mean = sum[i] / reps;
        const double var = sum_sq[i] / reps - mean * mean;
        const double se = std::sqrt(var / reps);
        CHECK(std::abs(mean) <= 3.0 * se);
    }
}

TEST_CASE("jump counts match the total rate") {
    const ModelSpec model = frozen_model(
        JumpMeasure({{vec({0.1, 0.0}), 0.7}, {vec({0.0, 0.1}), 0.5}})); // nu = 1.2
    const double horizon = 50.0;
    const int reps = 200;
    double count_sum = 0.0, count_sq = 0.0;
    for (int r = 0; r < reps; ++r) {
        SimParams params{.horizon = horizon, .step = 0.02,
                         .seed = 7000 + static_cast<std::uint64_t>(r)};
        const Trajectory traj =
            simulate_path(model, ControlLaw::constant(0), vec({0.0, 0.0}), params);
        const double rate = static_cast<double>(traj.jump_count) / horizon;
        count_sum += rate;
        count_sq += rate * rate;
    }
    const double mean = count_sum / reps;
    const double se = std::sqrt((count_sq / reps - mean * mean) / reps);
    CHECK(std::abs(mean - 1.2) <= 3.0 * se);
}

TEST_CASE("identical parameters give bit-identical trajectories") {
    const ModelSpec model = fixtures::v_model(2);
    SimParams params{.horizon = 5.0, .step = 0.01, .seed = 99};
    const Eigen::VectorXd x0 = vec({0.3, 0.7});
    const Trajectory a = simulate_path(model, ControlLaw::constant(1), x0, params);
    const Trajectory b = simulate_path(model, ControlLaw::constant(1), x0, params);
    REQUIRE(a.times.size() == b.times.size());
    CHECK(a.jump_count == b.jump_count);
    for (std::size_t s = 0; s < a.states.size(); ++s) {
        CHECK(std::memcmp(a.states[s].data(), b.states[s].data(), 2 * sizeof(double)) == 0);
        CHECK(a.cost_integral[s] == b.cost_integral[s]);
    }
}

TEST_CASE("exploding dynamics abort with a time-stamped diagnostic") {
    ModelSpec model = frozen_model();
    model.drift = [](const Eigen::VectorXd& x, const Eigen::VectorXd&) {
        return (1e160 * (x + Eigen::VectorXd::Ones(2))).eval();
    };
    SimParams params{.horizon = 1.0, .step = 0.01, .seed = 2};
    const Trajectory traj =
        simulate_path(model, ControlLaw::constant(0), vec({1.0, 1.0}), params);
    CHECK(traj.aborted);
    CHECK(traj.abort_reason.find("non-finite state at t") != std::string::npos);

    // aborted replications are excluded and counted
    const ErgodicEstimate est = estimate_ergodic_cost(
        model, ControlLaw::constant(0), vec({1.0, 1.0}), 1.0, 0.0, 0.01, 2, 3, 1);
    CHECK(est.aborted_replications == 3);
    CHECK(est.replication_averages.empty());
}

TEST_CASE("trajectory times are strictly increasing from zero") {
    const ModelSpec model = fixtures::ou1d_model();
    SimParams params{.horizon = 2.0, .step = 0.03, .seed = 12};
    const Trajectory traj =
        simulate_path(model, ControlLaw::constant(0), vec({0.5}), params);
    REQUIRE(!traj.times.empty());
    CHECK(traj.times.front() == 0.0);
    for (std::size_t s = 0; s + 1 < traj.times.size(); ++s)
        CHECK(traj.times[s] < traj.times[s + 1]);
    CHECK(traj.times.back() == doctest::Approx(2.0));
}

TEST_CASE("cost integral is nondecreasing") {
    const ModelSpec model = fixtures::v_model(2);
    SimParams params{.horizon = 10.0, .step = 0.01, .seed = 5};
    const Trajectory traj =
        simulate_path(model, ControlLaw::constant(0), vec({1.0, 1.0}), params);
    for (std::size_t s = 0; s + 1 < traj.cost_integral.size(); ++s)
        CHECK(traj.cost_integral[s] <= traj.cost_integral[s + 1] + 1e-15);
}

TEST_CASE("weak generator check: constants are exact") {
    const ModelSpec model = fixtures::v_model(2);
    const TestFunction one = TestFunction::constant(4.0, 2);
    const auto report = weak_generator_check(model, one, vec({0.5, 0.2}),
                                             model.controls.point(0), 1e-2, 100, 3);
    CHECK(report.discrepancy == doctest::Approx(0.0));
    CHECK(report.std_error == doctest::Approx(0.0));
}

TEST_CASE("weak generator check: linear functions match within noise for any h") {
    const ModelSpec model = fixtures::v_model(2);
    const TestFunction lin = TestFunction::linear(vec({1.0, -0.5}));
    for (double h : {0.05, 0.01}) {
        const auto report = weak_generator_check(model, lin, vec({0.4, -0.1}),
                                                 model.controls.point(2), h, 40000, 11);
        CHECK(std::abs(report.discrepancy) <= 3.0 * report.std_error);
    }
}

TEST_CASE("weak generator check: quadratic discrepancy shrinks as h halves") {
    const ModelSpec model = fixtures::v_model(2);
    // quadratic centered at the probe point: zero gradient there, so the O(h)
    // bias dominates the Monte Carlo noise and the refinement trend is stable
    const Eigen::VectorXd x = vec({2.0, 1.5});
    TestFunction sq;
    sq.value = [x](const Eigen::VectorXd& y) { return (y - x).squaredNorm(); };
    sq.gradient = [x](const Eigen::VectorXd& y) { return (2.0 * (y - x)).eval(); };
    sq.hessian = [](const Eigen::VectorXd&) {
        return (2.0 * Eigen::MatrixXd::Identity(2, 2)).eval();
    };
    const Eigen::VectorXd& u = model.controls.point(1);
    // common random numbers across the refinement (same seed)
    const auto r1 = weak_generator_check(model, sq, x, u, 4e-2, 200000, 17);
    const auto r2 = weak_generator_check(model, sq, x, u, 2e-2, 200000, 17);
    const auto r3 = weak_generator_check(model, sq, x, u, 1e-2, 200000, 17);
    CHECK(std::abs(r1.discrepancy) > std::abs(r2.discrepancy));
    CHECK(std::abs(r2.discrepancy) > std::abs(r3.discrepancy));
    CHECK(std::abs(r3.discrepancy) <= std::abs(r3.generator_value) * 0.05 +
                                          3.0 * r3.std_error);
}

TEST_CASE("constant cost estimates exactly") {
    const ModelSpec model = frozen_model();
    const ErgodicEstimate est = estimate_ergodic_cost(
        model, ControlLaw::constant(0), vec({1.0, 1.0}), 5.0, 1.0, 0.01, 3, 4);
    CHECK(est.point_estimate == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(est.std_error == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_THROWS_AS(estimate_ergodic_cost(model, ControlLaw::constant(0), vec({0.0, 0.0}),
                                          1.0, 2.0, 0.01, 1, 1),
                    std::invalid_argument);
}

TEST_CASE("OU with jumps: simulated ergodic cost matches the moment oracle") {
    const ModelSpec model = fixtures::ou1d_model();
    const double oracle = oracles::ou_second_moment(1.0, 1.0, fixtures::ou_atoms());
    CHECK(oracle == doctest::Approx(0.593)); // frozen from the moment balance
    const ErgodicEstimate est = estimate_ergodic_cost(
        model, ControlLaw::constant(0), vec({0.0}), 400.0, 40.0, 0.01, 12345, 16, 4);
    CHECK(est.aborted_replications == 0);
    CHECK(std::abs(est.point_estimate - oracle) <=
          3.0 * est.std_error + 0.05 * (1.0 + oracle));
}

TEST_CASE("transient control: the running average grows with the horizon") {
    const ModelSpec model = fixtures::v_model(4);
    const int transient = fixtures::simplex_corner_index(model.controls, 0);
    const ErgodicEstimate short_run = estimate_ergodic_cost(
        model, ControlLaw::constant(transient), vec({0.0, 0.0}), 50.0, 5.0, 0.01, 9, 4, 4);
    const ErgodicEstimate long_run = estimate_ergodic_cost(
        model, ControlLaw::constant(transient), vec({0.0, 0.0}), 100.0, 5.0, 0.01, 9, 4, 4);
    const ErgodicEstimate longer = estimate_ergodic_cost(
        model, ControlLaw::constant(transient), vec({0.0, 0.0}), 200.0, 5.0, 0.01, 9, 4, 4);
    CHECK(long_run.point_estimate > short_run.point_estimate);
    CHECK(longer.point_estimate > long_run.point_estimate);
}

TEST_CASE("empirical measure: frozen dynamics put unit mass in one cell") {
    const ModelSpec model = frozen_model();
    SimParams params{.horizon = 2.0, .step = 0.01, .seed = 3};
    const Eigen::VectorXd x0 = vec({0.52, -0.48});
    const Trajectory traj = simulate_path(model, ControlLaw::constant(0), x0, params);
    const Grid grid(2, 2.0, 9);
    const OccupationHistogram hist = empirical_measure(traj, grid);
    const std::size_t cell = grid.nearest_node(x0);
    CHECK(hist.cell_masses[static_cast<Eigen::Index>(cell)] == doctest::Approx(1.0));
    CHECK(hist.escaped_mass == doctest::Approx(0.0));
    CHECK(hist.cell_masses.sum() + hist.escaped_mass == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("empirical measure: concatenation is the time-weighted average") {
    const ModelSpec model = fixtures::v_model(2);
    const int stable = fixtures::simplex_corner_index(model.controls, 1);
    SimParams p1{.horizon = 4.0, .step = 0.01, .seed = 21};
    SimParams p2{.horizon = 2.0, .step = 0.01, .seed = 22};
    const Trajectory t1 = simulate_path(model, ControlLaw::constant(stable), vec({1.0, 0.0}), p1);
    const Trajectory t2 = simulate_path(model, ControlLaw::constant(stable), vec({-1.0, 0.5}), p2);

    // stitch t2 after t1 (the spatial histogram ignores the time origin)
    Trajectory cat = t1;
    for (std::size_t s = 1; s < t2.times.size(); ++s) {
        cat.times.push_back(t1.times.back() + t2.times[s]);
        cat.states.push_back(t2.states[s]);
        cat.cost_integral.push_back(0.0);
    }
    // states are sampled left-continuously, so re-anchor the seam state
    cat.states[t1.times.size() - 1] = t2.states[0];

    const Grid grid(2, 3.0, 13);
    const OccupationHistogram h1 = empirical_measure(t1, grid);
    const OccupationHistogram h2 = empirical_measure(t2, grid);
    const OccupationHistogram hc = empirical_measure(cat, grid);
    const double w1 = 4.0 / 6.0, w2 = 2.0 / 6.0;
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const double expected = w1 * h1.cell_masses[static_cast<Eigen::Index>(node)] +
                                w2 * h2.cell_masses[static_cast<Eigen::Index>(node)];
        CHECK(hc.cell_masses[static_cast<Eigen::Index>(node)] ==
              doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("escaped mass shrinks as the histogram box doubles") {
    const ModelSpec model = fixtures::v_model(4);
    const int stable = fixtures::simplex_corner_index(model.controls, 1);
    SimParams params{.horizon = 500.0, .step = 0.01, .seed = 77};
    const Trajectory traj =
        simulate_path(model, ControlLaw::constant(stable), vec({0.0, 0.0}), params);
    const OccupationHistogram small = empirical_measure(traj, Grid(2, 1.0, 9));
    const OccupationHistogram large = empirical_measure(traj, Grid(2, 2.0, 17));
    CHECK(large.escaped_mass < small.escaped_mass);
    CHECK(small.cell_masses.sum() + small.escaped_mass == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(large.cell_masses.sum() + large.escaped_mass == doctest::Approx(1.0).epsilon(1e-12));
}
