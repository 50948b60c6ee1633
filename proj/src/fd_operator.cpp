#include "jdctrl/fd_operator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>

namespace jdctrl {

namespace {

// Target resolution against the box. Clamp: componentwise clamp into the box.
// Dirichlet: anything touching the boundary layer or beyond is a known zero.
std::optional<std::size_t> resolve(const Grid& grid, std::vector<int> multi, BoundaryMode mode) {
    const int n = grid.nodes_per_axis();
    for (int axis = 0; axis < grid.dim(); ++axis) {
        int& v = multi[axis];
        if (mode == BoundaryMode::Clamp) {
            v = std::max(0, std::min(n - 1, v));
        } else {
            if (v < 1 || v > n - 2) return std::nullopt;
        }
    }
    return grid.flat_index(multi);
}

bool is_interior(const Grid& grid, std::size_t node) {
    const auto multi = grid.multi_index(node);
    const int n = grid.nodes_per_axis();
    for (int v : multi)
        if (v < 1 || v > n - 2) return false;
    return true;
}

} // namespace

GeneratorRowBuilder::GeneratorRowBuilder(const ModelSpec& model, const Grid& grid,
                                         BoundaryMode mode)
    : model_(model), grid_(grid), mode_(mode) {
    if (model.dim != grid.dim())
        throw std::invalid_argument("GeneratorRowBuilder: model and grid dimensions differ");
    const double diameter = 2.0 * grid.radius() * std::sqrt(static_cast<double>(grid.dim()));
    if (model.jumps.max_jump_norm() > diameter)
        throw std::invalid_argument(
            "GeneratorRowBuilder: a jump atom exceeds the box diameter");
}

double GeneratorRowBuilder::build(std::size_t node, const Eigen::VectorXd& u,
                                  std::vector<std::pair<std::size_t, double>>& entries) const {
    entries.clear();
    const int d = grid_.dim();
    const double h = grid_.spacing();
    const double h2 = h * h;
    const Eigen::VectorXd x = grid_.node_point(node);
    const Eigen::MatrixXd a = model_.diffusion_matrix(x);
    const Eigen::VectorXd bt = model_.compensated_drift(x, u);
    const auto multi = grid_.multi_index(node);
    const int n = grid_.nodes_per_axis();

    double diag = 0.0;
    auto add = [&](std::vector<int> target, double coeff) {
        const auto resolved = resolve(grid_, std::move(target), mode_);
        if (!resolved) return; // zero extension
        if (*resolved == node)
            diag += coeff;
        else
            entries.emplace_back(*resolved, coeff);
    };
    auto shifted = [&](int axis, int offset) {
        std::vector<int> m = multi;
        m[axis] += offset;
        return m;
    };

    // diffusion, axial part
    for (int i = 0; i < d; ++i) {
        const double w = a(i, i) / h2;
        if (w == 0.0) continue;
        add(shifted(i, +1), w);
        add(shifted(i, -1), w);
        diag -= 2.0 * w;
    }
    // diffusion, cross part (pairwise 7-point stencil)
    for (int i = 0; i < d; ++i) {
        for (int j = i + 1; j < d; ++j) {
            const double c = a(i, j);
            if (c == 0.0) continue;
            const double w = std::abs(c) / h2;
            const int sj = c > 0.0 ? +1 : -1;
            std::vector<int> m = multi;
            m[i] += 1; m[j] += sj;
            add(m, w);
            m = multi;
            m[i] -= 1; m[j] -= sj;
            add(m, w);
            diag += 2.0 * w;
            add(shifted(i, +1), -w);
            add(shifted(i, -1), -w);
            add(shifted(j, +1), -w);
            add(shifted(j, -1), -w);
        }
    }
    // drift: central where the monotonicity budget allows, upwind otherwise
    for (int i = 0; i < d; ++i) {
        const double v = bt[i];
        if (v == 0.0) continue;
        double off_axis = 0.0;
        for (int j = 0; j < d; ++j)
            if (j != i) off_axis += std::abs(a(i, j));
        const bool have_lo = multi[i] > 0;
        const bool have_hi = multi[i] < n - 1;
        const bool central_ok =
            have_lo && have_hi && (a(i, i) - off_axis >= 0.5 * h * std::abs(v));
        if (central_ok) {
            add(shifted(i, +1), v / (2.0 * h));
            add(shifted(i, -1), -v / (2.0 * h));
        } else if (v > 0.0) {
            if (have_hi || mode_ == BoundaryMode::DirichletZero) {
                add(shifted(i, +1), v / h);
                diag -= v / h;
            } // clamp at the top face: forward difference of clamped values is 0
        } else {
            if (have_lo || mode_ == BoundaryMode::DirichletZero) {
                add(shifted(i, -1), -v / h);
                diag += v / h;
            }
        }
    }

    // nonlocal part: -nu on the diagonal plus atom-weighted interpolation
    double lost = 0.0;
    const double nu = model_.jumps.total_mass();
    if (nu > 0.0) {
        diag -= nu;
        std::vector<std::pair<std::size_t, double>> stencil;
        for (const auto& atom : model_.jumps.atoms()) {
            Eigen::VectorXd target = x + atom.z;
            if (mode_ == BoundaryMode::Clamp) {
                for (int axis = 0; axis < d; ++axis)
                    target[axis] =
                        std::max(-grid_.radius(), std::min(grid_.radius(), target[axis]));
            } else if (!grid_.contains(target)) {
                lost += atom.w;
                continue;
            }
            grid_.interpolation_stencil(target, stencil);
            for (const auto& [tnode, weight] : stencil) {
                if (mode_ == BoundaryMode::DirichletZero && !is_interior(grid_, tnode)) {
                    lost += atom.w * weight;
                    continue;
                }
                if (tnode == node)
                    diag += atom.w * weight;
                else
                    entries.emplace_back(tnode, atom.w * weight);
            }
        }
    }

    entries.emplace_back(node, diag);
    // merge duplicate targets
    std::sort(entries.begin(), entries.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        if (out > 0 && entries[out - 1].first == entries[i].first)
            entries[out - 1].second += entries[i].second;
        else
            entries[out++] = entries[i];
    }
    entries.resize(out);
    return lost;
}

double GeneratorRowBuilder::apply(std::size_t node, const Eigen::VectorXd& u,
                                  const Eigen::VectorXd& psi) const {
    static thread_local std::vector<std::pair<std::size_t, double>> entries;
    build(node, u, entries);
    double sum = 0.0;
    for (const auto& [tnode, coeff] : entries)
        sum += coeff * psi[static_cast<Eigen::Index>(tnode)];
    return sum;
}

bool GeneratorRowBuilder::diffusion_dominant(std::size_t node, const Eigen::VectorXd& u) const {
    const Eigen::VectorXd x = grid_.node_point(node);
    const Eigen::MatrixXd a = model_.diffusion_matrix(x);
    const Eigen::VectorXd bt = model_.compensated_drift(x, u);
    const double h = grid_.spacing();
    for (int i = 0; i < grid_.dim(); ++i) {
        double off = 0.0;
        for (int j = 0; j < grid_.dim(); ++j)
            if (j != i) off += std::abs(a(i, j));
        if (a(i, i) / h < off / h + std::abs(bt[i])) return false;
    }
    return true;
}

namespace {

DiscretizedGenerator assemble(const ModelSpec& model, const Grid& grid, BoundaryMode mode,
                              const std::function<const Eigen::VectorXd&(std::size_t)>& control_at) {
    DiscretizedGenerator gen;
    gen.mode = mode;

    const std::size_t node_count = grid.node_count();
    gen.node_to_active.assign(node_count, -1);
    for (std::size_t node = 0; node < node_count; ++node) {
        if (mode == BoundaryMode::Clamp || is_interior(grid, node)) {
            gen.node_to_active[node] = static_cast<long>(gen.active_to_node.size());
            gen.active_to_node.push_back(node);
        }
    }

    GeneratorRowBuilder rb(model, grid, mode);
    std::vector<Eigen::Triplet<double>> triplets;
    std::vector<std::pair<std::size_t, double>> entries;
    const std::size_t n_active = gen.active_to_node.size();
    for (std::size_t row = 0; row < n_active; ++row) {
        const std::size_t node = gen.active_to_node[row];
        const Eigen::VectorXd& u = control_at(node);
        const double lost = rb.build(node, u, entries);
        gen.max_lost_jump_mass = std::max(gen.max_lost_jump_mass, lost);
        if (gen.monotone && !rb.diffusion_dominant(node, u)) gen.monotone = false;
        for (const auto& [tnode, coeff] : entries) {
            const long col = gen.node_to_active[tnode];
            if (col >= 0)
                triplets.emplace_back(static_cast<int>(row), static_cast<int>(col), coeff);
        }
    }
    gen.op.resize(static_cast<int>(n_active), static_cast<int>(n_active));
    gen.op.setFromTriplets(triplets.begin(), triplets.end());
    return gen;
}

} // namespace

DiscretizedGenerator discretize_generator(const ModelSpec& model, const Grid& grid,
                                          const Eigen::VectorXd& u, BoundaryMode mode) {
    return assemble(model, grid, mode,
                    [&u](std::size_t) -> const Eigen::VectorXd& { return u; });
}

DiscretizedGenerator discretize_generator(const ModelSpec& model, const Grid& grid,
                                          const PolicyField& policy, BoundaryMode mode) {
    return assemble(model, grid, mode, [&](std::size_t node) -> const Eigen::VectorXd& {
        return model.controls.point(policy.at(node));
    });
}

} // namespace jdctrl
