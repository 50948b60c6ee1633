#include "jdctrl/perturbation.hpp"

#include <cmath>
#include <stdexcept>

namespace jdctrl {

ModelSpec perturbed_model(const ModelSpec& model, const PerturbedCostSpec& spec) {
    if (spec.epsilon < 0.0 || spec.epsilon >= 1.0 / spec.kappa_tilde)
        throw std::invalid_argument("perturbed_model: epsilon must lie in [0, 1/kappa_tilde)");
    ModelSpec out = model;
    if (spec.epsilon == 0.0) return out;
    const CostFn base = model.cost;
    const auto F = spec.F_tilde;
    const double eps = spec.epsilon;
    out.cost = [base, F, eps](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        return base(x, u) + eps * F(x);
    };
    out.name = model.name + "+eps";
    return out;
}

PerturbedCostSpec default_perturbation(const ModelSpec& model, const Grid& grid,
                                       double epsilon, double cone_delta,
                                       double ball_radius) {
    const double m = static_cast<double>(model.growth_degree);

    // C_F: smallest constant with c <= C_F (1 + |x|^m) at every node/control,
    // then a 10% margin.
    double ratio_max = 0.0;
    const std::size_t node_count = grid.node_count();
    for (std::size_t node = 0; node < node_count; ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        const double denom = 1.0 + std::pow(x.norm(), m);
        for (std::size_t k = 0; k < model.controls.size(); ++k)
            ratio_max = std::max(ratio_max, model.cost_at(x, k) / denom);
    }
    const double c_f = 1.1 * std::max(ratio_max, 1e-12);

    PerturbedCostSpec spec;
    spec.epsilon = epsilon;
    spec.F_tilde = [c_f, m](const Eigen::VectorXd& x) {
        return c_f * (1.0 + std::pow(x.norm(), m));
    };

    // kappa_tilde: smallest constant making
    //   F_tilde <= kappa (1_{B0} + c 1_{Ktilde} + F 1_{Ktilde^c})
    // hold at the nodes, with Ktilde = (K_delta x A) + {c > F} and F = |x|^m.
    double kappa = 1.0;
    for (std::size_t node = 0; node < node_count; ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        const double r = x.norm();
        const double floor = std::pow(r, m);
        const double indicator = r <= ball_radius ? 1.0 : 0.0;
        const bool in_cone = std::abs(x.sum()) > cone_delta * r;
        const double f_tilde = spec.F_tilde(x);
        for (std::size_t k = 0; k < model.controls.size(); ++k) {
            const double c = model.cost_at(x, k);
            const bool in_ktilde = in_cone || c > floor;
            const double denom = indicator + (in_ktilde ? c : floor);
            if (denom > 0.0) kappa = std::max(kappa, f_tilde / denom);
        }
    }
    spec.kappa_tilde = kappa;

    if (epsilon < 0.0 || epsilon >= 1.0 / spec.kappa_tilde)
        throw std::invalid_argument(
            "default_perturbation: epsilon out of range [0, 1/kappa_tilde), kappa_tilde = " +
            std::to_string(spec.kappa_tilde));
    return spec;
}

} // namespace jdctrl
