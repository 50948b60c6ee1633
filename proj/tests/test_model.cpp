#include <doctest.h>

#include "fixtures.hpp"
#include "oracles.hpp"

#include "jdctrl/grid.hpp"
#include "jdctrl/model.hpp"
#include "jdctrl/network.hpp"
#include "jdctrl/perturbation.hpp"
#include "jdctrl/rng.hpp"

#include <cmath>
#include <cstring>
#include <limits>

using namespace jdctrl;
using fixtures::vec;

TEST_CASE("simplex discretization satisfies the simplex constraints") {
    const ControlSpace cs = ControlSpace::simplex(3, 4);
    CHECK(cs.size() == 15); // compositions of 4 into 3 parts
    cs.validate();
    for (std::size_t k = 0; k < cs.size(); ++k) {
        CHECK(cs.point(k).minCoeff() >= 0.0);
        CHECK(cs.point(k).sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("product simplex validates both factors") {
    const ControlSpace cs = ControlSpace::product_simplex(3, 2, 2);
    CHECK(cs.size() == 6 * 3);
    cs.validate();
    std::vector<Eigen::VectorXd> bad = {vec({0.5, 0.5, 0.2, 0.8, 0.2})};
    auto broken = ControlSpace::finite_points(bad);
    CHECK_NOTHROW(broken.validate()); // finite points: only finiteness is required
    CHECK_THROWS_AS(ControlSpace::simplex(0, 4), std::invalid_argument);
    CHECK_THROWS_AS(ControlSpace::finite_points({}), std::invalid_argument);
}

TEST_CASE("jump measure masses and moments") {
    JumpMeasure jm({{vec({0.5, 0.0}), 0.6}, {vec({-0.3, 0.4}), 0.4}});
    jm.validate();
    CHECK(jm.total_mass() == doctest::Approx(1.0));
    CHECK(jm.mean_jump()[0] == doctest::Approx(0.6 * 0.5 - 0.4 * 0.3));
    CHECK(jm.mean_jump()[1] == doctest::Approx(0.4 * 0.4));
    const double m2 = 0.6 * 0.25 + 0.4 * 0.25;
    CHECK(jm.moment(2) == doctest::Approx(m2));

    const JumpMeasure doubled = jm.scaled(2.0);
    CHECK(doubled.total_mass() == doctest::Approx(2.0));
    CHECK(doubled.mean_jump()[0] == doctest::Approx(2.0 * jm.mean_jump()[0]));
    CHECK_THROWS_AS(jm.scaled(0.0), std::invalid_argument);
}

TEST_CASE("V drift at <e,x> = 0 loses both control terms") {
    NetworkParams params = fixtures::v_params();
    params.ell = vec({0.0, 0.0});
    params.gamma = vec({1.0, 1.0});
    params.jump_rate = 0.0;
    params.jump_sizes.clear();
    const ModelSpec model = build_v_model(params, 2);
    const Eigen::VectorXd x = vec({1.0, -1.0});
    for (std::size_t k = 0; k < model.controls.size(); ++k) {
        const Eigen::VectorXd b = model.drift(x, model.controls.point(k));
        CHECK(b[0] == doctest::Approx(-1.0));
        CHECK(b[1] == doctest::Approx(1.0));
    }
}

TEST_CASE("1-D V drift matches the scalar oracle") {
    NetworkParams params;
    params.ell = vec({1.0});
    params.M1 = Eigen::MatrixXd::Constant(1, 1, 2.0);
    params.M2 = Eigen::MatrixXd::Zero(1, 1);
    params.gamma = vec({0.5});
    params.theta = vec({1.0});
    params.cost_queue = vec({1.0});
    params.cost_idle = vec({1.0});
    params.cost_exponent = 1.0;
    const ModelSpec model = build_v_model(params, 1);

    const double expected = oracles::v_drift_scalar(1.0, 2.0, 0.5, 3.0, 1.0);
    CHECK(expected == doctest::Approx(-0.5)); // hand evaluation frozen
    const Eigen::VectorXd b = model.drift(vec({3.0}), vec({1.0}));
    CHECK(b[0] == doctest::Approx(expected).epsilon(1e-14));

    // grid of scalar-oracle comparisons
    CounterRng rng(7);
    for (int trial = 0; trial < 50; ++trial) {
        const double x = 8.0 * (rng.uniform() - 0.5);
        const double ref = oracles::v_drift_scalar(1.0, 2.0, 0.5, x, 1.0);
        CHECK(model.drift(vec({x}), vec({1.0}))[0] == doctest::Approx(ref).epsilon(1e-14));
    }
}

TEST_CASE("V cost vanishes on the hyperplane and rejects bad parameters") {
    const ModelSpec model = fixtures::v_model(2);
    const Eigen::VectorXd x = vec({2.0, -2.0});
    for (std::size_t k = 0; k < model.controls.size(); ++k)
        CHECK(model.cost(x, model.controls.point(k)) == doctest::Approx(0.0));

    NetworkParams bad = fixtures::v_params();
    bad.cost_exponent = 0.5;
    CHECK_THROWS_WITH_AS(build_v_model(bad), doctest::Contains("cost_exponent"),
                         std::invalid_argument);
    NetworkParams two_pools = fixtures::v_params();
    two_pools.M2 = Eigen::MatrixXd::Zero(2, 2);
    CHECK_THROWS_AS(build_v_model(two_pools), std::invalid_argument);
}

TEST_CASE("V drift is deterministic bit for bit") {
    const ModelSpec model = fixtures::v_model(4);
    const Eigen::VectorXd x = vec({0.37, -1.22});
    const Eigen::VectorXd u = model.controls.point(3);
    const Eigen::VectorXd b1 = model.drift(x, u);
    const Eigen::VectorXd b2 = model.drift(x, u);
    CHECK(std::memcmp(b1.data(), b2.data(), sizeof(double) * 2) == 0);
}

TEST_CASE("W matrices: equal cross rates zero out M2") {
    auto [M1, M2] = w_matrices(1.0, 1.25, 1.25, 1.5);
    CHECK(M2.cwiseAbs().maxCoeff() == doctest::Approx(0.0));
    CHECK(M1(1, 0) == doctest::Approx(0.0));
}

TEST_CASE("W drift: control terms vanish on the hyperplane") {
    const NetworkParams params = fixtures::w_params();
    const ModelSpec model = build_w_model(params, 2);
    const Eigen::VectorXd x = vec({1.0, 0.5, -1.5});
    REQUIRE(x.sum() == doctest::Approx(0.0));
    const Eigen::VectorXd expected = params.ell - params.M1 * x;
    for (std::size_t k = 0; k < model.controls.size(); k += 5) {
        const Eigen::VectorXd b = model.drift(x, model.controls.point(k));
        for (int i = 0; i < 3; ++i) CHECK(b[i] == doctest::Approx(expected[i]).epsilon(1e-13));
    }
}

TEST_CASE("W drift full evaluation against the dense matrix oracle") {
    const NetworkParams params = fixtures::w_params();
    const ModelSpec model = build_w_model(params, 4);

    const std::vector<double> x = {1.0, 1.0, -1.0};
    const std::vector<double> uc = {1.0, 0.0, 0.0};
    const std::vector<double> us = {0.0, 1.0};
    const std::vector<std::vector<double>> M1 = {
        {params.M1(0, 0), params.M1(0, 1), params.M1(0, 2)},
        {params.M1(1, 0), params.M1(1, 1), params.M1(1, 2)},
        {params.M1(2, 0), params.M1(2, 1), params.M1(2, 2)}};
    const std::vector<std::vector<double>> M2 = {{params.M2(0, 0), params.M2(0, 1)},
                                                 {params.M2(1, 0), params.M2(1, 1)},
                                                 {params.M2(2, 0), params.M2(2, 1)}};
    const auto expected = oracles::network_drift_dense(
        {0.4, 0.2, 0.1}, M1, M2, {0.0, 0.0, 1.0}, x, uc, us);

    Eigen::VectorXd u(5);
    u << 1.0, 0.0, 0.0, 0.0, 1.0;
    const Eigen::VectorXd b = model.drift(vec({1.0, 1.0, -1.0}), u);
    for (int i = 0; i < 3; ++i) CHECK(b[i] == doctest::Approx(expected[i]).epsilon(1e-13));

    NetworkParams wrong = params;
    wrong.ell = vec({1.0, 1.0});
    wrong.M1 = Eigen::MatrixXd::Identity(2, 2);
    wrong.gamma = vec({0.0, 0.0});
    wrong.theta = vec({1.0, 1.0});
    wrong.cost_queue = vec({1.0, 1.0});
    CHECK_THROWS_AS(build_w_model(wrong), std::invalid_argument);
}

TEST_CASE("generator annihilates constants") {
    const ModelSpec model = fixtures::v_model(2);
    const TestFunction one = TestFunction::constant(1.0, 2);
    CounterRng rng(3);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = vec({4.0 * (rng.uniform() - 0.5), 4.0 * (rng.uniform() - 0.5)});
        const Eigen::VectorXd& u = model.controls.point(trial % model.controls.size());
        CHECK(eval_generator(model, one, x, u) == doctest::Approx(0.0));
    }
}

TEST_CASE("generator on linear functions equals <b,p> and is independent of sigma") {
    ModelSpec model = fixtures::v_model(2);
    const Eigen::VectorXd p = vec({0.7, -1.3});
    const TestFunction lin = TestFunction::linear(p);
    CounterRng rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::VectorXd x = vec({3.0 * (rng.uniform() - 0.5), 3.0 * (rng.uniform() - 0.5)});
        const Eigen::VectorXd& u = model.controls.point(trial % model.controls.size());
        const double expected =
            oracles::linear_generator_symbolic(model.drift(x, u), model.jumps, p);
        CHECK(eval_generator(model, lin, x, u) ==
              doctest::Approx(expected).epsilon(1e-12));

        // swapping the diffusion leaves linear-function values unchanged
        ModelSpec scaled_sigma = model;
        scaled_sigma.diffusion = [](const Eigen::VectorXd&) {
            return (3.0 * Eigen::MatrixXd::Identity(2, 2)).eval();
        };
        CHECK(eval_generator(scaled_sigma, lin, x, u) ==
              doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("generator on |x|^2 with a single atom matches the brute-force oracle") {
    ModelSpec model;
    model.dim = 2;
    model.controls = ControlSpace::finite_points({Eigen::VectorXd::Zero(2)});
    model.jumps = JumpMeasure({{vec({0.3, -0.2}), 0.7}});
    model.drift = [](const Eigen::VectorXd&, const Eigen::VectorXd&) {
        return Eigen::VectorXd::Zero(2).eval();
    };
    model.diffusion = [](const Eigen::VectorXd&) {
        return Eigen::MatrixXd::Identity(2, 2).eval();
    };
    model.cost = [](const Eigen::VectorXd&, const Eigen::VectorXd&) { return 0.0; };

    const TestFunction sq = TestFunction::quadratic(2.0 * Eigen::MatrixXd::Identity(2, 2));
    const Eigen::VectorXd x = vec({1.5, -0.5});
    const Eigen::VectorXd u = Eigen::VectorXd::Zero(2);

    // d + w(2<x,z> + |z|^2) + <b_tilde, 2x> with b_tilde = -w z here
    const Eigen::VectorXd z = vec({0.3, -0.2});
    const double w = 0.7;
    const Eigen::VectorXd bt = (-w * z).eval();
    const double closed_form = 2.0 + w * (2.0 * x.dot(z) + z.squaredNorm()) + bt.dot(2.0 * x);
    const double brute = oracles::generator_brute_force(model, sq, x, u);
    CHECK(brute == doctest::Approx(closed_form).epsilon(1e-13));
    CHECK(eval_generator(model, sq, x, u) == doctest::Approx(brute).epsilon(1e-13));
}

TEST_CASE("generator is linear in the test function") {
    const ModelSpec model = fixtures::v_model(2);
    const TestFunction f = TestFunction::quadratic(
        (Eigen::MatrixXd(2, 2) << 1.0, 0.3, 0.3, 2.0).finished(), vec({0.5, -1.0}));
    const TestFunction g = TestFunction::linear(vec({-0.2, 0.9}));
    CounterRng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        const double alpha = 4.0 * (rng.uniform() - 0.5);
        const double beta = 4.0 * (rng.uniform() - 0.5);
        const TestFunction combo = TestFunction::combine(alpha, f, beta, g);
        const Eigen::VectorXd x = vec({2.0 * (rng.uniform() - 0.5), 2.0 * (rng.uniform() - 0.5)});
        const Eigen::VectorXd& u = model.controls.point(trial % model.controls.size());
        const double lhs = eval_generator(model, combo, x, u);
        const double rhs =
            alpha * eval_generator(model, f, x, u) + beta * eval_generator(model, g, x, u);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("nonlocal part scales linearly with the jump rate") {
    const ModelSpec base = fixtures::v_model(2);
    ModelSpec no_jumps = base;
    no_jumps.jumps = JumpMeasure();
    const TestFunction f = TestFunction::quadratic(
        (Eigen::MatrixXd(2, 2) << 2.0, 0.0, 0.0, 1.0).finished(), vec({0.2, 0.1}));
    const Eigen::VectorXd x = vec({0.8, -0.4});
    const Eigen::VectorXd& u = base.controls.point(2);

    // isolate the nonlocal-plus-compensator contribution
    auto jump_part = [&](const ModelSpec& m) {
        return eval_generator(m, f, x, u) - eval_generator(no_jumps, f, x, u);
    };
    const double n1 = jump_part(base);
    for (double lambda : {2.0, 5.0, 0.25}) {
        ModelSpec scaled = base;
        scaled.jumps = base.jumps.scaled(lambda);
        CHECK(jump_part(scaled) == doctest::Approx(lambda * n1).epsilon(1e-12));
    }
}

TEST_CASE("V drift Lipschitz estimate is stable under refinement") {
    const ModelSpec model = fixtures::v_model(2);
    const Eigen::VectorXd& u = model.controls.point(1);
    auto lipschitz = [&](double step) {
        double worst = 0.0;
        CounterRng rng(23);
        for (int trial = 0; trial < 200; ++trial) {
            Eigen::VectorXd x = vec({6.0 * (rng.uniform() - 0.5), 6.0 * (rng.uniform() - 0.5)});
            Eigen::VectorXd dir = vec({rng.normal(), rng.normal()});
            dir.normalize();
            const Eigen::VectorXd diff =
                model.drift(x + step * dir, u) - model.drift(x, u);
            worst = std::max(worst, diff.norm() / step);
        }
        return worst;
    };
    const double l1 = lipschitz(1e-3);
    const double l2 = lipschitz(1e-4);
    CHECK(std::abs(l1 - l2) < 0.2 * (1.0 + std::max(l1, l2)));
}

TEST_CASE("perturbed model: zero epsilon leaves the cost untouched") {
    const ModelSpec model = fixtures::v_model(2);
    PerturbedCostSpec spec;
    spec.epsilon = 0.0;
    spec.kappa_tilde = 1.0;
    spec.F_tilde = [](const Eigen::VectorXd& x) { return 1.0 + x.squaredNorm(); };
    const ModelSpec same = perturbed_model(model, spec);
    CounterRng rng(31);
    for (int trial = 0; trial < 10000; ++trial) {
        const Eigen::VectorXd x = vec({8.0 * (rng.uniform() - 0.5), 8.0 * (rng.uniform() - 0.5)});
        const std::size_t k = trial % model.controls.size();
        CHECK(same.cost(x, model.controls.point(k)) == model.cost(x, model.controls.point(k)));
    }
}

TEST_CASE("perturbed model: the exact epsilon F_tilde shift") {
    const ModelSpec model = fixtures::v_model(2);
    const double m = model.growth_degree;
    PerturbedCostSpec spec;
    spec.epsilon = 0.1;
    spec.kappa_tilde = 2.0;
    spec.F_tilde = [m](const Eigen::VectorXd& x) {
        return 1.0 + std::pow(x.norm(), m);
    };
    const ModelSpec shifted = perturbed_model(model, spec);
    CounterRng rng(37);
    for (int trial = 0; trial < 100; ++trial) {
        const Eigen::VectorXd x = vec({8.0 * (rng.uniform() - 0.5), 8.0 * (rng.uniform() - 0.5)});
        const Eigen::VectorXd& u = model.controls.point(trial % model.controls.size());
        const double diff = shifted.cost(x, u) - model.cost(x, u);
        CHECK(diff == doctest::Approx(0.1 * (1.0 + std::pow(x.norm(), m))).epsilon(1e-13));
    }
    PerturbedCostSpec bad = spec;
    bad.epsilon = 0.6; // >= 1/kappa_tilde
    CHECK_THROWS_AS(perturbed_model(model, bad), std::invalid_argument);
}

TEST_CASE("default perturbation satisfies the sandwich and coercivity proxies") {
    const ModelSpec model = fixtures::v_model(4);
    const Grid grid(2, 4.0, 41);
    // the V fixture's measured kappa_tilde is large (the cone holds nodes with
    // cost near delta|x| while F~ tracks the most expensive class), so epsilon
    // must sit below 1/kappa_tilde
    const PerturbedCostSpec spec = default_perturbation(model, grid, 0.02);
    CHECK(spec.kappa_tilde >= 1.0);
    CHECK(0.02 < 1.0 / spec.kappa_tilde);

    // c <= F_tilde at every node and control
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        const double f = spec.F_tilde(x);
        for (std::size_t k = 0; k < model.controls.size(); ++k)
            CHECK(model.cost_at(x, k) <= f * (1.0 + 1e-12));
    }

    // coercivity proxy: boundary shell dominates the inner half box
    double shell_min = std::numeric_limits<double>::infinity();
    double inner_max = 0.0;
    for (std::size_t node = 0; node < grid.node_count(); ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        const double f = spec.F_tilde(x);
        if (x.cwiseAbs().maxCoeff() >= grid.radius() - grid.spacing() / 2)
            shell_min = std::min(shell_min, f);
        if (x.cwiseAbs().maxCoeff() <= grid.radius() / 2) inner_max = std::max(inner_max, f);
    }
    CHECK(shell_min > inner_max);
}

TEST_CASE("quadratic form check on the Lyapunov matrix") {
    CHECK(quadratic_form_check(5.0 * Eigen::MatrixXd::Identity(2, 2),
                               Eigen::MatrixXd::Identity(2, 2)));
    CHECK_FALSE(quadratic_form_check(Eigen::MatrixXd::Identity(2, 2),
                                     Eigen::MatrixXd::Identity(2, 2)));
}
