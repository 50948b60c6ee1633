#include "jdctrl/network.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <stdexcept>
#include <string>

namespace jdctrl {

namespace {

double pos_part(double v) { return v > 0.0 ? v : 0.0; }
double neg_part(double v) { return v < 0.0 ? -v : 0.0; }

Eigen::MatrixXd diagonal_from(const Eigen::VectorXd& d) {
    return d.asDiagonal().toDenseMatrix();
}

} // namespace

JumpMeasure NetworkParams::jump_measure() const {
    std::vector<JumpAtom> atoms;
    atoms.reserve(jump_sizes.size());
    for (const auto& [size, prob] : jump_sizes) {
        if (prob <= 0.0)
            throw std::invalid_argument("NetworkParams.jump_sizes: probabilities must be > 0");
        atoms.push_back({(size * theta).eval(), jump_rate * prob});
    }
    return JumpMeasure(std::move(atoms));
}

void NetworkParams::validate() const {
    const int d = dim();
    if (d < 1) throw std::invalid_argument("NetworkParams.ell: dimension must be >= 1");
    if (M1.rows() != d || M1.cols() != d)
        throw std::invalid_argument("NetworkParams.M1: must be d x d");
    for (int i = 0; i < d; ++i) {
        if (M1(i, i) <= 0.0)
            throw std::invalid_argument("NetworkParams.M1: diagonal entries must be > 0");
        for (int j = i + 1; j < d; ++j)
            if (M1(i, j) != 0.0)
                throw std::invalid_argument("NetworkParams.M1: must be lower triangular");
    }
    if (gamma.size() != d) throw std::invalid_argument("NetworkParams.gamma: must have d entries");
    if ((gamma.array() < 0.0).any())
        throw std::invalid_argument("NetworkParams.gamma: entries must be >= 0");
    if (theta.size() != d) throw std::invalid_argument("NetworkParams.theta: must have d entries");
    if ((theta.array() <= 0.0).any())
        throw std::invalid_argument("NetworkParams.theta: entries must be > 0");
    if (cost_exponent < 1.0)
        throw std::invalid_argument("NetworkParams.cost_exponent: m must be >= 1");
    if (cost_queue.size() != d)
        throw std::invalid_argument("NetworkParams.cost_queue: must have d entries");
    if (jump_rate < 0.0)
        throw std::invalid_argument("NetworkParams.jump_rate: must be >= 0");
    if (jump_rate > 0.0) {
        double total_prob = 0.0;
        for (const auto& [size, prob] : jump_sizes) total_prob += prob;
        if (std::abs(total_prob - 1.0) > 1e-10)
            throw std::invalid_argument("NetworkParams.jump_sizes: probabilities must sum to 1");
    }
    if (sigma_diag.size() != 0) {
        if (sigma_diag.size() != d)
            throw std::invalid_argument("NetworkParams.sigma_diag: must have d entries");
        if ((sigma_diag.array() <= 0.0).any())
            throw std::invalid_argument("NetworkParams.sigma_diag: entries must be > 0");
    }
}

ModelSpec build_v_model(const NetworkParams& params, int control_mesh) {
    params.validate();
    if (params.pools() > 1)
        throw std::invalid_argument("build_v_model: J must be 1 (M2 is ignored)");
    const int d = params.dim();

    const Eigen::VectorXd ell = params.ell;
    const Eigen::MatrixXd M = params.M1;
    const Eigen::VectorXd gamma = params.gamma;
    const Eigen::VectorXd cq = params.cost_queue;
    const double s1 = params.cost_idle.size() > 0 ? params.cost_idle[0] : 1.0;
    const double m = params.cost_exponent;
    const Eigen::VectorXd sigma_diag =
        params.sigma_diag.size() == d ? params.sigma_diag : Eigen::VectorXd::Ones(d).eval();

    ModelSpec model;
    model.dim = d;
    model.name = "v-model";
    model.growth_degree = static_cast<int>(std::ceil(m));
    model.controls = ControlSpace::simplex(d, control_mesh);
    model.jumps = params.jump_rate > 0.0 ? params.jump_measure() : JumpMeasure();

    model.drift = [ell, M, gamma](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        const double ex_pos = pos_part(x.sum());
        return (ell - M * (x - ex_pos * u) - ex_pos * gamma.cwiseProduct(u)).eval();
    };
    model.diffusion = [sigma_diag, d](const Eigen::VectorXd&) {
        return diagonal_from(sigma_diag);
    };
    model.cost = [cq, s1, m, d](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        const double ex = x.sum();
        double c = 0.0;
        const double qp = pos_part(ex);
        for (int i = 0; i < d; ++i) c += cq[i] * std::pow(qp * u[i], m);
        c += s1 * std::pow(neg_part(ex), m);
        return c;
    };
    return model;
}

ModelSpec build_w_model(const NetworkParams& params, int control_mesh) {
    params.validate();
    const int d = params.dim();
    const int J = params.pools();
    if (d != 3 || J != 2)
        throw std::invalid_argument("build_w_model: requires d = 3 and J = 2");
    if (params.cost_idle.size() != J)
        throw std::invalid_argument("NetworkParams.cost_idle: must have J entries");

    const Eigen::VectorXd ell = params.ell;
    const Eigen::MatrixXd M1 = params.M1;
    const Eigen::MatrixXd M2 = params.M2;
    const Eigen::VectorXd gamma = params.gamma;
    const Eigen::VectorXd cq = params.cost_queue;
    const Eigen::VectorXd ci = params.cost_idle;
    const double m = params.cost_exponent;
    const Eigen::VectorXd sigma_diag =
        params.sigma_diag.size() == d ? params.sigma_diag : Eigen::VectorXd::Ones(d).eval();

    ModelSpec model;
    model.dim = d;
    model.name = "w-model";
    model.growth_degree = static_cast<int>(std::ceil(m));
    model.controls = ControlSpace::product_simplex(d, J, control_mesh);
    model.jumps = params.jump_rate > 0.0 ? params.jump_measure() : JumpMeasure();

    model.drift = [ell, M1, M2, gamma, d](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        const Eigen::VectorXd uc = u.head(d);
        const Eigen::VectorXd us = u.tail(u.size() - d);
        const double ex = x.sum();
        const double ex_pos = pos_part(ex);
        const double ex_neg = neg_part(ex);
        return (ell - M1 * (x - ex_pos * uc) - ex_pos * gamma.cwiseProduct(uc) +
                ex_neg * (M2 * us))
            .eval();
    };
    model.diffusion = [sigma_diag, d](const Eigen::VectorXd&) {
        return diagonal_from(sigma_diag);
    };
    model.cost = [cq, ci, m, d, J](const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
        const double ex = x.sum();
        const double qp = pos_part(ex);
        const double qn = neg_part(ex);
        double c = 0.0;
        for (int i = 0; i < d; ++i) c += cq[i] * std::pow(qp * u[i], m);
        for (int j = 0; j < J; ++j) c += ci[j] * std::pow(qn * u[d + j], m);
        return c;
    };
    return model;
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> w_matrices(double mu11, double mu21,
                                                       double mu22, double mu32) {
    if (mu11 <= 0.0 || mu21 <= 0.0 || mu22 <= 0.0 || mu32 <= 0.0)
        throw std::invalid_argument("w_matrices: service rates must be > 0");
    Eigen::MatrixXd M1(3, 3), M2(3, 2);
    M1 << mu11, 0.0, 0.0,
          mu22 - mu21, mu22, 0.0,
          0.0, 0.0, mu32;
    M2 << 0.0, 0.0,
          mu21 - mu22, 0.0,
          0.0, 0.0;
    return {M1, M2};
}

bool quadratic_form_check(const Eigen::MatrixXd& Q, const Eigen::MatrixXd& M1) {
    const Eigen::MatrixXd S = Q * M1 + M1.transpose() * Q;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
    return es.eigenvalues().minCoeff() >= 8.0;
}

} // namespace jdctrl
