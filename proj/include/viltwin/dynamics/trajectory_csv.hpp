#pragma once

#include <filesystem>
#include <ostream>

#include "viltwin/dynamics/kinematic.hpp"

namespace viltwin::dynamics {

/// Header `t,x,y,theta,v`, one row per point, 17 significant digits.
void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory);

}  // namespace viltwin::dynamics
