#pragma once

#include <Eigen/Dense>

#include <vector>

namespace jdctrl {

struct JumpAtom {
    Eigen::VectorXd z; // jump size in R^d
    double w = 0.0;    // arrival rate of this atom
};

/// Finite discrete Levy measure: jumps of size z_i arrive at rate w_i.
class JumpMeasure {
public:
    JumpMeasure() = default;
    explicit JumpMeasure(std::vector<JumpAtom> atoms);

    const std::vector<JumpAtom>& atoms() const { return atoms_; }
    std::size_t atom_count() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }
    int dim() const { return atoms_.empty() ? 0 : static_cast<int>(atoms_.front().z.size()); }

    /// Total mass nu(R^d) = sum of rates.
    double total_mass() const { return total_mass_; }

    /// First moment of the measure, sum_i w_i z_i.
    const Eigen::VectorXd& mean_jump() const { return mean_jump_; }

    /// m-th absolute moment, sum_i w_i |z_i|^m.
    double moment(double m) const;

    double max_jump_norm() const;

    /// Same atoms with every rate multiplied by lambda > 0.
    JumpMeasure scaled(double lambda) const;

    void validate() const;

private:
    std::vector<JumpAtom> atoms_;
    double total_mass_ = 0.0;
    Eigen::VectorXd mean_jump_;
};

} // namespace jdctrl
