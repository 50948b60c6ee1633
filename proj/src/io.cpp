#include "jdctrl/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace jdctrl {

std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        out << content;
        if (!out) throw std::runtime_error("write failed for " + tmp.string());
    }
    fs::rename(tmp, target);
}

std::string value_policy_csv(const Grid& grid, const ValueField& value,
                             const PolicyField& policy) {
    std::string out;
    for (int axis = 0; axis < grid.dim(); ++axis)
        out += "x_" + std::to_string(axis + 1) + ",";
    out += "value,control\n";
    const std::size_t node_count = grid.node_count();
    for (std::size_t node = 0; node < node_count; ++node) {
        const Eigen::VectorXd x = grid.node_point(node);
        for (int axis = 0; axis < grid.dim(); ++axis)
            out += format_double(x[axis]) + ",";
        out += format_double(value.at(node)) + "," + std::to_string(policy.at(node)) + "\n";
    }
    return out;
}

std::string trajectory_csv(const Trajectory& trajectory, int dim) {
    std::string out = "t,";
    for (int axis = 0; axis < dim; ++axis) out += "x_" + std::to_string(axis + 1) + ",";
    out += "u_index,cumulative_cost\n";
    for (std::size_t s = 0; s < trajectory.times.size(); ++s) {
        out += format_double(trajectory.times[s]) + ",";
        for (int axis = 0; axis < dim; ++axis)
            out += format_double(trajectory.states[s][axis]) + ",";
        const int u = s == 0 ? (trajectory.controls_applied.empty()
                                    ? 0
                                    : trajectory.controls_applied.front())
                             : trajectory.controls_applied[s - 1];
        out += std::to_string(u) + "," + format_double(trajectory.cost_integral[s]) + "\n";
    }
    return out;
}

std::string histogram_csv(const OccupationHistogram& histogram) {
    const Grid& grid = histogram.grid;
    std::string out;
    for (int axis = 0; axis < grid.dim(); ++axis)
        out += "x_" + std::to_string(axis + 1) + ",";
    out += "mass\n";
    const std::size_t node_count = grid.node_count();
    for (std::size_t node = 0; node < node_count; ++node) {
        const double mass = histogram.cell_masses[static_cast<Eigen::Index>(node)];
        if (mass == 0.0) continue;
        const Eigen::VectorXd x = grid.node_point(node);
        for (int axis = 0; axis < grid.dim(); ++axis)
            out += format_double(x[axis]) + ",";
        out += format_double(mass) + "\n";
    }
    return out;
}

std::string sweep_csv(const TruncationSweepResult& sweep) {
    std::string out = "R,rho\n";
    for (std::size_t i = 0; i < sweep.radii.size(); ++i)
        out += format_double(sweep.radii[i]) + "," + format_double(sweep.rho_values[i]) + "\n";
    return out;
}

} // namespace jdctrl
