#include "jdctrl/control_space.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace jdctrl {

namespace {

constexpr double kSimplexTol = 1e-12;

// All lattice points (k_1,...,k_dim)/mesh with nonnegative integer k summing
// to mesh, in lexicographic order.
void enumerate_simplex(int dim, int mesh, std::vector<Eigen::VectorXd>& out) {
    Eigen::VectorXd point = Eigen::VectorXd::Zero(dim);
    std::vector<int> k(dim, 0);
    // recursive enumeration without recursion: odometer over the first dim-1 axes
    std::function<void(int, int)> fill = [&](int axis, int remaining) {
        if (axis == dim - 1) {
            k[axis] = remaining;
            for (int i = 0; i < dim; ++i) point[i] = static_cast<double>(k[i]) / mesh;
            out.push_back(point);
            return;
        }
        for (int v = 0; v <= remaining; ++v) {
            k[axis] = v;
            fill(axis + 1, remaining - v);
        }
    };
    fill(0, mesh);
}

void check_simplex_block(const Eigen::VectorXd& u, int offset, int len, std::size_t index) {
    double sum = 0.0;
    for (int i = 0; i < len; ++i) {
        const double v = u[offset + i];
        if (v < -kSimplexTol)
            throw std::invalid_argument("ControlSpace: point " + std::to_string(index) +
                                        " has negative coordinate " + std::to_string(v));
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTol)
        throw std::invalid_argument("ControlSpace: point " + std::to_string(index) +
                                    " coordinates sum to " + std::to_string(sum) +
                                    ", expected 1");
}

} // namespace

ControlSpace ControlSpace::simplex(int dim, int mesh_n) {
    if (dim < 1) throw std::invalid_argument("ControlSpace::simplex: dim must be >= 1");
    if (mesh_n < 1) throw std::invalid_argument("ControlSpace::simplex: mesh_n must be >= 1");
    ControlSpace cs;
    cs.kind_ = ControlKind::Simplex;
    cs.dim_c_ = dim;
    cs.dim_s_ = 0;
    enumerate_simplex(dim, mesh_n, cs.points_);
    return cs;
}

ControlSpace ControlSpace::product_simplex(int dim_c, int dim_s, int mesh_n) {
    if (dim_c < 1 || dim_s < 1)
        throw std::invalid_argument("ControlSpace::product_simplex: dims must be >= 1");
    ControlSpace cs;
    cs.kind_ = ControlKind::ProductSimplex;
    cs.dim_c_ = dim_c;
    cs.dim_s_ = dim_s;
    std::vector<Eigen::VectorXd> left, right;
    enumerate_simplex(dim_c, mesh_n, left);
    enumerate_simplex(dim_s, mesh_n, right);
    cs.points_.reserve(left.size() * right.size());
    for (const auto& uc : left) {
        for (const auto& us : right) {
            Eigen::VectorXd u(dim_c + dim_s);
            u.head(dim_c) = uc;
            u.tail(dim_s) = us;
            cs.points_.push_back(std::move(u));
        }
    }
    return cs;
}

ControlSpace ControlSpace::finite_points(std::vector<Eigen::VectorXd> points) {
    if (points.empty())
        throw std::invalid_argument("ControlSpace::finite_points: need at least one point");
    ControlSpace cs;
    cs.kind_ = ControlKind::FinitePoints;
    cs.dim_c_ = static_cast<int>(points.front().size());
    cs.points_ = std::move(points);
    for (const auto& p : cs.points_)
        if (p.size() != cs.dim_c_)
            throw std::invalid_argument("ControlSpace::finite_points: inconsistent dimensions");
    return cs;
}

std::size_t ControlSpace::nearest_index(const Eigen::VectorXd& u) const {
    std::size_t best = 0;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < points_.size(); ++k) {
        const double d = (points_[k] - u).squaredNorm();
        if (d < best_dist) {
            best_dist = d;
            best = k;
        }
    }
    return best;
}

void ControlSpace::validate() const {
    if (points_.empty()) throw std::invalid_argument("ControlSpace: empty discretization");
    for (std::size_t k = 0; k < points_.size(); ++k) {
        switch (kind_) {
        case ControlKind::Simplex:
            check_simplex_block(points_[k], 0, dim_c_, k);
            break;
        case ControlKind::ProductSimplex:
            check_simplex_block(points_[k], 0, dim_c_, k);
            check_simplex_block(points_[k], dim_c_, dim_s_, k);
            break;
        case ControlKind::FinitePoints:
            if (!points_[k].allFinite())
                throw std::invalid_argument("ControlSpace: non-finite control point");
            break;
        }
    }
}

} // namespace jdctrl
