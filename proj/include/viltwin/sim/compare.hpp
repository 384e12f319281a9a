#pragma once

#include <ostream>

#include "viltwin/core/bag.hpp"
#include "viltwin/dynamics/kinematic.hpp"

namespace viltwin::sim {

struct ModelErrors {
    double position_rmse = 0.0;  ///< [m]
    double velocity_mse = 0.0;   ///< [(m/s)^2]
    std::size_t samples = 0;     ///< grid points compared
};

/// Pose/twist stream of one vehicle. Points pair a pose with the twist of
/// the same timestamp; a pose without one keeps the previous speed.
dynamics::Trajectory vehicle_trajectory(const Bag& bag, int id);

/// Resamples both trajectories by linear interpolation onto a uniform grid
/// of step `grid` over their common time span. Throws ValidationError when
/// either is empty or the spans do not overlap.
ModelErrors compare_trajectories(const dynamics::Trajectory& a, const dynamics::Trajectory& b, double grid = 0.01);

ModelErrors compare_models(const Bag& a, const Bag& b, int id, double grid = 0.01);

/// Header `t,id,x,y,theta,v`, one row per pose message in bag order.
void write_trace_csv(std::ostream& out, const Bag& bag);

}  // namespace viltwin::sim
