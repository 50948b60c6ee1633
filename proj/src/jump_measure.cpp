#include "jdctrl/jump_measure.hpp"

#include <cmath>
#include <stdexcept>

namespace jdctrl {

JumpMeasure::JumpMeasure(std::vector<JumpAtom> atoms) : atoms_(std::move(atoms)) {
    const int d = dim();
    mean_jump_ = Eigen::VectorXd::Zero(d);
    for (const auto& a : atoms_) {
        total_mass_ += a.w;
        mean_jump_ += a.w * a.z;
    }
}

double JumpMeasure::moment(double m) const {
    double s = 0.0;
    for (const auto& a : atoms_) s += a.w * std::pow(a.z.norm(), m);
    return s;
}

double JumpMeasure::max_jump_norm() const {
    double s = 0.0;
    for (const auto& a : atoms_) s = std::max(s, a.z.norm());
    return s;
}

JumpMeasure JumpMeasure::scaled(double lambda) const {
    if (lambda <= 0.0) throw std::invalid_argument("JumpMeasure::scaled: lambda must be > 0");
    std::vector<JumpAtom> scaled_atoms = atoms_;
    for (auto& a : scaled_atoms) a.w *= lambda;
    return JumpMeasure(std::move(scaled_atoms));
}

void JumpMeasure::validate() const {
    const int d = dim();
    for (const auto& a : atoms_) {
        if (a.w <= 0.0) throw std::invalid_argument("JumpMeasure: atom rate must be > 0");
        if (a.z.size() != d) throw std::invalid_argument("JumpMeasure: inconsistent atom dimension");
        if (!a.z.allFinite()) throw std::invalid_argument("JumpMeasure: non-finite atom");
    }
    if (!std::isfinite(total_mass_))
        throw std::invalid_argument("JumpMeasure: total mass must be finite");
}

} // namespace jdctrl
