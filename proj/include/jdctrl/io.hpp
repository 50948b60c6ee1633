#pragma once

#include "jdctrl/grid.hpp"
#include "jdctrl/sim.hpp"
#include "jdctrl/solver.hpp"

#include <string>

namespace jdctrl {

/// Writes content to path atomically (temp file in the same directory, then
/// rename). Creates parent directories as needed.
void write_file_atomic(const std::string& path, const std::string& content);

/// node coordinates, value, control index; "%.17g" formatting so reruns are
/// byte-identical.
std::string value_policy_csv(const Grid& grid, const ValueField& value,
                             const PolicyField& policy);

/// t, x_1..x_d, u_index, cumulative_cost.
std::string trajectory_csv(const Trajectory& trajectory, int dim);

/// cell-center coordinates and mass (escaped mass goes to the manifest).
std::string histogram_csv(const OccupationHistogram& histogram);

/// R, rho per sweep point.
std::string sweep_csv(const TruncationSweepResult& sweep);

std::string format_double(double v);

} // namespace jdctrl
