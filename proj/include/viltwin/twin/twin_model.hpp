#pragma once

#include "viltwin/dynamics/kinematic.hpp"
#include "viltwin/twin/network.hpp"

namespace viltwin::twin {

struct TwinStepResult {
    dynamics::VehicleState state;
    HistoryWindow window;
};

/// One step of the learned vehicle. The newest (u, v) pair is pushed into
/// the window first, so the network sees the same alignment as the training
/// windows (rows i..i+T-1 predict v at i+T). Position and heading use the
/// kinematic rows with the current v; the new v comes from the network,
/// clamped to [0, v_max]. Throws ValidationError for a window whose length
/// is not the network's T (pre-fill cold windows with zeros).
TwinStepResult twin_step(const TwinNetwork& net, const HistoryWindow& window, const dynamics::VehicleState& state,
                         double delta, double u, double dt, const dynamics::KinematicParams& params);

/// One-step velocity prediction of the kinematic model with the PD loop for
/// the same window, using a fixed dt. Baseline for fidelity comparisons.
double kinematic_baseline_predict(const HistoryWindow& window, double dt, const dynamics::KinematicParams& params);

}  // namespace viltwin::twin
