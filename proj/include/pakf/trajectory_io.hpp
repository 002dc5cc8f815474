#pragma once

#include "pakf/filters.hpp"
#include "pakf/pwass_model.hpp"

#include <filesystem>
#include <vector>

namespace pakf {

/// trajectory.csv: header "t,x1..xn,u1..um,y1..yk", one row per time step.
/// The input fields of the final row are empty (T states, T-1 inputs).
void write_trajectory_csv(const Trajectory<double>& traj, const std::filesystem::path& path);

/// Reads a trajectory whose column counts match the model. The x columns are
/// optional; without them the returned trajectory has no states.
/// Throws Error(DimensionMismatch) when the columns disagree with the model.
Trajectory<double> read_trajectory_csv(const std::filesystem::path& path,
                                       const PwassModel<double>& model);

/// estimates.csv: "t,m1..mn,P1_1,P1_2,..,Pn_n" with the covariance row-major.
void write_estimates_csv(const std::vector<GaussianBelief<double>>& estimates,
                         const std::filesystem::path& path);

}  // namespace pakf
