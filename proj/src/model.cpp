#include "jdctrl/model.hpp"

#include <stdexcept>

namespace jdctrl {

Eigen::MatrixXd ModelSpec::diffusion_matrix(const Eigen::VectorXd& x) const {
    const Eigen::MatrixXd sigma = diffusion(x);
    return 0.5 * sigma * sigma.transpose();
}

Eigen::VectorXd ModelSpec::compensated_drift(const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& u) const {
    Eigen::VectorXd b = drift(x, u);
    if (!jumps.empty()) b -= jumps.mean_jump();
    return b;
}

TestFunction TestFunction::constant(double c, int dim) {
    TestFunction f;
    f.value = [c](const Eigen::VectorXd&) { return c; };
    f.gradient = [dim](const Eigen::VectorXd&) { return Eigen::VectorXd::Zero(dim).eval(); };
    f.hessian = [dim](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(dim, dim).eval(); };
    return f;
}

TestFunction TestFunction::linear(const Eigen::VectorXd& p) {
    TestFunction f;
    const int dim = static_cast<int>(p.size());
    f.value = [p](const Eigen::VectorXd& x) { return p.dot(x); };
    f.gradient = [p](const Eigen::VectorXd&) { return p; };
    f.hessian = [dim](const Eigen::VectorXd&) { return Eigen::MatrixXd::Zero(dim, dim).eval(); };
    return f;
}

TestFunction TestFunction::quadratic(const Eigen::MatrixXd& H, const Eigen::VectorXd& p0) {
    const int dim = static_cast<int>(H.rows());
    const Eigen::VectorXd p = p0.size() == 0 ? Eigen::VectorXd::Zero(dim).eval() : p0;
    TestFunction f;
    f.value = [H, p](const Eigen::VectorXd& x) { return 0.5 * x.dot(H * x) + p.dot(x); };
    f.gradient = [H, p](const Eigen::VectorXd& x) { return (0.5 * (H + H.transpose()) * x + p).eval(); };
    f.hessian = [H](const Eigen::VectorXd&) { return (0.5 * (H + H.transpose())).eval(); };
    return f;
}

TestFunction TestFunction::combine(double alpha, const TestFunction& f,
                                   double beta, const TestFunction& g) {
    TestFunction h;
    h.value = [=](const Eigen::VectorXd& x) { return alpha * f.value(x) + beta * g.value(x); };
    h.gradient = [=](const Eigen::VectorXd& x) {
        return (alpha * f.gradient(x) + beta * g.gradient(x)).eval();
    };
    h.hessian = [=](const Eigen::VectorXd& x) {
        return (alpha * f.hessian(x) + beta * g.hessian(x)).eval();
    };
    return h;
}

double eval_generator(const ModelSpec& model, const TestFunction& fn,
                      const Eigen::VectorXd& x, const Eigen::VectorXd& u) {
    const Eigen::MatrixXd a = model.diffusion_matrix(x);
    const Eigen::MatrixXd hess = fn.hessian(x);
    const Eigen::VectorXd grad = fn.gradient(x);
    const double phi_x = fn.value(x);

    double result = a.cwiseProduct(hess).sum();
    result += model.compensated_drift(x, u).dot(grad);
    for (const auto& atom : model.jumps.atoms())
        result += atom.w * (fn.value(x + atom.z) - phi_x);
    return result;
}

} // namespace jdctrl
