#include "jdctrl/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace jdctrl {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

/// Iterative solve at 1e-10 relative residual with a direct sparse fallback.
Eigen::VectorXd solve_linear(const SpMat& A, const Eigen::VectorXd& rhs, bool diagonally_dominant,
                             bool& ok, std::string& error) {
    ok = true;
    if (diagonally_dominant) {
        Eigen::BiCGSTAB<SpMat, Eigen::IncompleteLUT<double>> solver;
        solver.setTolerance(1e-10);
        solver.setMaxIterations(4000);
        solver.compute(A);
        if (solver.info() == Eigen::Success) {
            Eigen::VectorXd x = solver.solve(rhs);
            if (solver.info() == Eigen::Success && x.allFinite()) return x;
        }
    }
    Eigen::SparseLU<SpMat> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) {
        ok = false;
        error = "sparse LU factorization failed (matrix numerically singular)";
        return Eigen::VectorXd::Zero(rhs.size());
    }
    Eigen::VectorXd x = lu.solve(rhs);
    if (!x.allFinite()) {
        ok = false;
        error = "sparse LU produced non-finite solution";
        return Eigen::VectorXd::Zero(rhs.size());
    }
    return x;
}

} // namespace

void validate_model_on_grid(const ModelSpec& model, const Grid& grid) {
    const std::size_t node_count = grid.node_count();
    for (std::size_t node = 0; node < node_count; ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        const double det = model.diffusion(x).determinant();
        if (std::abs(det) < 1e-12)
            throw std::invalid_argument(
                "model: diffusion singular at grid node (det = " + std::to_string(det) + ")");
        for (std::size_t k = 0; k < model.controls.size(); ++k)
            if (model.cost_at(x, k) < 0.0)
                throw std::invalid_argument("model: negative running cost at a grid node");
    }
}

namespace {

PolicyField myopic_policy(const ModelSpec& model, const Grid& grid) {
    PolicyField policy(grid);
    const std::size_t node_count = grid.node_count();
    for (std::size_t node = 0; node < node_count; ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        double best = std::numeric_limits<double>::infinity();
        int best_k = 0;
        for (std::size_t k = 0; k < model.controls.size(); ++k) {
            const double c = model.cost(x, model.controls.point(k));
            if (c < best) {
                best = c;
                best_k = static_cast<int>(k);
            }
        }
        policy.control_index[node] = best_k;
    }
    return policy;
}

/// Pointwise greedy improvement; returns the number of changed nodes.
/// Frozen nodes keep their current control.
std::size_t improve_policy(const ModelSpec& model, const GeneratorRowBuilder& rb,
                           const Eigen::VectorXd& value_full, PolicyField& policy,
                           const std::vector<bool>* frozen,
                           const std::vector<std::size_t>& nodes) {
    std::size_t changed = 0;
    for (std::size_t node : nodes) {
        if (frozen && (*frozen)[node]) continue;
        const Eigen::VectorXd x = rb.grid().node_point(node);
        double best = std::numeric_limits<double>::infinity();
        int best_k = 0;
        for (std::size_t k = 0; k < model.controls.size(); ++k) {
            const double q =
                rb.apply(node, model.controls.point(k), value_full) + model.cost_at(x, k);
            if (q < best) { // strict: ties resolve to the lowest index
                best = q;
                best_k = static_cast<int>(k);
            }
        }
        if (policy.control_index[node] != best_k) {
            policy.control_index[node] = best_k;
            ++changed;
        }
    }
    return changed;
}

DiscountedSolveResult solve_discounted_impl(const ModelSpec& model, const Grid& grid,
                                            double alpha, double tol, int max_iter,
                                            BoundaryMode mode, const PolicyField* warm_start) {
    if (alpha <= 0.0 || alpha > 1.0)
        throw std::invalid_argument("solve_discounted: alpha must lie in (0, 1]");
    if (tol <= 0.0) throw std::invalid_argument("solve_discounted: tol must be > 0");
    validate_model_on_grid(model, grid);

    GeneratorRowBuilder rb(model, grid, mode);
    PolicyField policy = warm_start ? *warm_start : myopic_policy(model, grid);

    DiscountedSolveResult result;
    result.value = ValueField(grid);
    Eigen::VectorXd psi_full = Eigen::VectorXd::Zero(grid.node_count());

    DiscretizedGenerator gen = discretize_generator(model, grid, policy, mode);
    const std::size_t n_active = gen.active_to_node.size();

    double prev_change = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < max_iter; ++iter) {
        if (iter > 0) gen = discretize_generator(model, grid, policy, mode);

        SpMat M = -gen.op;
        for (std::size_t i = 0; i < n_active; ++i)
            M.coeffRef(static_cast<int>(i), static_cast<int>(i)) += alpha;
        M.makeCompressed();
        Eigen::VectorXd rhs(n_active);
        for (std::size_t i = 0; i < n_active; ++i) {
            const std::size_t node = gen.active_to_node[i];
            rhs[static_cast<Eigen::Index>(i)] = model.cost_at(grid.node_point(node), policy.at(node));
        }
        bool ok = true;
        std::string err;
        const Eigen::VectorXd psi = solve_linear(M, rhs, true, ok, err);
        if (!ok) throw std::runtime_error("solve_discounted: " + err);

        Eigen::VectorXd new_full = Eigen::VectorXd::Zero(grid.node_count());
        for (std::size_t i = 0; i < n_active; ++i)
            new_full[static_cast<Eigen::Index>(gen.active_to_node[i])] =
                psi[static_cast<Eigen::Index>(i)];

        const double change = (new_full - psi_full).cwiseAbs().maxCoeff();
        psi_full = new_full;
        result.iterations = iter + 1;

        const std::size_t improved =
            improve_policy(model, rb, psi_full, policy, nullptr, gen.active_to_node);
        if (change < tol || (improved == 0 && iter > 0)) {
            result.converged = true;
            result.final_change = change;
            break;
        }
        // a non-monotone stencil is tolerated unless the iteration diverges
        if (!gen.monotone && iter > 2 && change > 10.0 * prev_change && change > 1.0)
            throw std::runtime_error(
                "solve_discounted: iteration diverging under non-monotone stencil");
        prev_change = change;
        result.final_change = change;
    }
    result.value.values = psi_full;
    result.policy = policy;
    return result;
}

} // namespace

DiscountedSolveResult solve_discounted_dirichlet(const ModelSpec& model, const Grid& grid,
                                                 double alpha, double tol, int max_iter) {
    return solve_discounted_impl(model, grid, alpha, tol, max_iter,
                                 BoundaryMode::DirichletZero, nullptr);
}

DiscountedSolveResult solve_discounted_clamped(const ModelSpec& model, const Grid& grid,
                                               double alpha, double tol, int max_iter,
                                               const PolicyField* warm_start) {
    return solve_discounted_impl(model, grid, alpha, tol, max_iter, BoundaryMode::Clamp,
                                 warm_start);
}

std::vector<double> geometric_alpha_schedule(double first, double factor, double alpha_min) {
    if (first <= 0.0 || factor <= 0.0 || factor >= 1.0 || alpha_min <= 0.0 ||
        alpha_min > first)
        throw std::invalid_argument("geometric_alpha_schedule: need first > alpha_min > 0 "
                                    "and factor in (0,1)");
    std::vector<double> schedule;
    double alpha = first;
    while (alpha > alpha_min) {
        schedule.push_back(alpha);
        alpha *= factor;
    }
    schedule.push_back(alpha); // first term at or below alpha_min
    return schedule;
}

ErgodicSolveResult vanishing_discount(const ModelSpec& model, const Grid& grid,
                                      const std::vector<double>& alpha_schedule,
                                      double tol, int max_iter) {
    if (alpha_schedule.empty())
        throw std::invalid_argument("vanishing_discount: empty alpha schedule");
    for (std::size_t i = 0; i + 1 < alpha_schedule.size(); ++i)
        if (alpha_schedule[i + 1] >= alpha_schedule[i])
            throw std::invalid_argument("vanishing_discount: alpha schedule must be "
                                        "strictly decreasing");

    ErgodicSolveResult result;
    result.method = "vanishing-discount";
    result.value = ValueField(grid);

    const std::size_t origin = grid.origin_index();
    Eigen::VectorXd prev_tilde;
    PolicyField policy;
    bool have_policy = false;
    double rho = 0.0;
    int total_iterations = 0;

    for (double alpha : alpha_schedule) {
        DiscountedSolveResult solve = solve_discounted_clamped(
            model, grid, alpha, tol, max_iter, have_policy ? &policy : nullptr);
        total_iterations += solve.iterations;
        policy = solve.policy;
        have_policy = true;
        rho = alpha * solve.value.at(origin);

        Eigen::VectorXd tilde =
            solve.value.values.array() - solve.value.at(origin);
        result.value_oscillations.push_back(tilde.maxCoeff() - tilde.minCoeff());
        if (prev_tilde.size() > 0)
            result.cauchy_increments.push_back((tilde - prev_tilde).cwiseAbs().maxCoeff());
        prev_tilde = std::move(tilde);
    }

    result.rho_star = rho;
    result.value.values = prev_tilde;
    result.value.values[static_cast<Eigen::Index>(origin)] = 0.0;
    result.policy = policy;
    result.iterations = total_iterations;
    result.residual = hjb_residual(model, grid, result.value, rho);

    result.converged = true;
    const auto& inc = result.cauchy_increments;
    if (inc.size() >= 3) {
        const std::size_t k = inc.size();
        if (inc[k - 1] > inc[k - 2] && inc[k - 2] > inc[k - 3]) {
            result.converged = false;
            result.diagnostic = "Cauchy increments increasing across the last three alphas "
                                "(grid too small or model unstable)";
        }
    }
    return result;
}

std::optional<PolicyEvaluation> policy_evaluate(const ModelSpec& model, const Grid& grid,
                                                const PolicyField& policy, std::string* error) {
    DiscretizedGenerator gen = discretize_generator(model, grid, policy, BoundaryMode::Clamp);
    const std::size_t n = gen.active_to_node.size();
    const std::size_t origin = grid.origin_index();

    // augmented unknowns (h, rho): rows A h - rho = -c, plus h(origin) = 0
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(gen.op.nonZeros() + n + 1);
    for (int k = 0; k < gen.op.outerSize(); ++k)
        for (SpMat::InnerIterator it(gen.op, k); it; ++it)
            triplets.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  it.value());
    for (std::size_t i = 0; i < n; ++i)
        triplets.emplace_back(static_cast<int>(i), static_cast<int>(n), -1.0);
    triplets.emplace_back(static_cast<int>(n), static_cast<int>(origin), 1.0);

    SpMat M(static_cast<int>(n) + 1, static_cast<int>(n) + 1);
    M.setFromTriplets(triplets.begin(), triplets.end());

    Eigen::VectorXd rhs(n + 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t node = gen.active_to_node[i];
        rhs[static_cast<Eigen::Index>(i)] =
            -model.cost_at(grid.node_point(node), policy.at(node));
    }
    rhs[static_cast<Eigen::Index>(n)] = 0.0;

    bool ok = true;
    std::string err;
    const Eigen::VectorXd sol = solve_linear(M, rhs, false, ok, err);
    if (!ok) {
        if (error)
            *error = "policy evaluation singular (policy chain not unichain on the grid): " + err;
        return std::nullopt;
    }

    PolicyEvaluation eval;
    eval.rho = sol[static_cast<Eigen::Index>(n)];
    eval.h = ValueField(grid);
    eval.h.values = sol.head(static_cast<Eigen::Index>(n));
    eval.h.values[static_cast<Eigen::Index>(origin)] = 0.0;
    return eval;
}

ErgodicSolveResult solve_ergodic_pi(const ModelSpec& model, const Grid& grid, double tol,
                                    int max_iter, const PolicyField* initial,
                                    const std::vector<bool>* frozen) {
    if (tol <= 0.0) throw std::invalid_argument("solve_ergodic_pi: tol must be > 0");
    validate_model_on_grid(model, grid);

    GeneratorRowBuilder rb(model, grid, BoundaryMode::Clamp);
    PolicyField policy = initial ? *initial : myopic_policy(model, grid);
    std::vector<std::size_t> all_nodes(grid.node_count());
    for (std::size_t i = 0; i < all_nodes.size(); ++i) all_nodes[i] = i;

    ErgodicSolveResult result;
    result.method = "policy-iteration";
    result.value = ValueField(grid);

    double rho_prev = std::numeric_limits<double>::infinity();
    int small_change_streak = 0;
    for (int iter = 0; iter < max_iter; ++iter) {
        std::string err;
        auto eval = policy_evaluate(model, grid, policy, &err);
        if (!eval) {
            result.diagnostic = err;
            result.converged = false;
            return result;
        }
        result.iterations = iter + 1;
        result.rho_star = eval->rho;
        result.rho_iterates.push_back(eval->rho);
        result.value = eval->h;
        result.policy = policy;

        const std::size_t changed =
            improve_policy(model, rb, eval->h.values, policy, frozen, all_nodes);
        const double drho = std::abs(eval->rho - rho_prev);
        rho_prev = eval->rho;
        if (changed == 0 && (iter == 0 || drho < tol)) {
            result.converged = true;
            break;
        }
        small_change_streak = drho < tol ? small_change_streak + 1 : 0;
        if (small_change_streak >= 3) {
            // policy cycling among near-ties; rho has settled
            result.converged = true;
            result.diagnostic = "policy oscillation among ties; rho stable within tol";
            break;
        }
    }
    result.residual = hjb_residual(model, grid, result.value, result.rho_star);
    return result;
}

PolicyField extract_policy(const ModelSpec& model, const Grid& grid, const ValueField& value,
                           BoundaryMode mode) {
    if (!value.all_finite())
        throw std::invalid_argument("extract_policy: value field must be finite");
    GeneratorRowBuilder rb(model, grid, mode);
    PolicyField policy(grid);
    std::vector<std::size_t> all_nodes(grid.node_count());
    for (std::size_t i = 0; i < all_nodes.size(); ++i) all_nodes[i] = i;
    improve_policy(model, rb, value.values, policy, nullptr, all_nodes);
    return policy;
}

TruncationSweepResult truncation_sweep(const ModelSpec& model, const Grid& grid,
                                       const std::vector<double>& radii,
                                       const PolicyField& outer_control, double epsilon,
                                       double tol, int max_iter) {
    if (radii.empty()) throw std::invalid_argument("truncation_sweep: empty radius list");
    for (std::size_t i = 0; i + 1 < radii.size(); ++i)
        if (radii[i + 1] <= radii[i])
            throw std::invalid_argument("truncation_sweep: radii must be strictly increasing");
    if (radii.back() > grid.radius() + 1e-12)
        throw std::invalid_argument("truncation_sweep: radii must not exceed the box radius");

    std::string err;
    if (!policy_evaluate(model, grid, outer_control, &err))
        throw std::runtime_error("truncation_sweep: outer control unstable: " + err);

    TruncationSweepResult sweep;
    sweep.epsilon = epsilon;
    sweep.outer_control_tag = "policy-field";
    sweep.radii = radii;

    const std::size_t node_count = grid.node_count();
    for (double radius : radii) {
        // improvement is free on the open ball B_R; R = 0 freezes everything
        std::vector<bool> frozen(node_count, false);
        for (std::size_t node = 0; node < node_count; ++node)
            frozen[node] = grid.node_point(node).norm() >= radius;
        ErgodicSolveResult res =
            solve_ergodic_pi(model, grid, tol, max_iter, &outer_control, &frozen);
        if (res.iterations == 0 && !res.diagnostic.empty())
            throw std::runtime_error("truncation_sweep: " + res.diagnostic);
        sweep.rho_values.push_back(res.rho_star);
    }
    return sweep;
}

double hjb_residual(const ModelSpec& model, const Grid& grid, const ValueField& value,
                    double rho) {
    GeneratorRowBuilder rb(model, grid, BoundaryMode::Clamp);
    double residual = 0.0;
    const std::size_t node_count = grid.node_count();
    for (std::size_t node = 0; node < node_count; ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < model.controls.size(); ++k)
            best = std::min(best, rb.apply(node, model.controls.point(k), value.values) +
                                      model.cost_at(x, k));
        residual = std::max(residual, std::abs(best - rho));
    }
    return residual;
}

} // namespace jdctrl
