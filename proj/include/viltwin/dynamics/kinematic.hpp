#pragma once

#include <span>
#include <vector>

#include "viltwin/core/sampling.hpp"

namespace viltwin::dynamics {

struct VehicleState {
    double x = 0.0;      ///< [m]
    double y = 0.0;      ///< [m]
    double theta = 0.0;  ///< heading [rad], not wrapped
    double v = 0.0;      ///< longitudinal speed [m/s]
    friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct ControlInput {
    double delta = 0.0;  ///< steering command [rad]
    double u = 0.0;      ///< velocity command [m/s]
    friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

struct KinematicParams {
    double wheelbase = 0.32;  ///< l [m]
    double kp = 2.0;          ///< proportional gain [1/s]
    double kd = 0.1;          ///< derivative gain [-]
    double delta_max = 0.4189;
    double v_max = 4.0;

    /// Throws ValidationError when a parameter is out of range.
    void validate() const;
};

/// Previous command and velocity for the PD derivative estimates.
struct PdMemory {
    double u_prev = 0.0;
    double v_prev = 0.0;
};

struct PdResult {
    double accel;     ///< a_t [m/s^2]
    PdMemory memory;  ///< (u, v) for the next call
};

/// a = kp (u - v) + kd (du - dv), with backward-difference rates over dt.
/// Throws ValidationError for dt <= 0.
PdResult pd_accel(double u, double v, const PdMemory& mem, double dt, const KinematicParams& params);

/// One explicit Euler step of the kinematic bicycle:
///   x' = x + dt v cos(theta)
///   y' = y + dt v sin(theta)
///   theta' = theta + (dt / l) v tan(delta)
///   v' = clamp(v + dt a, 0, v_max)
/// |delta| >= pi/2 is rejected; the delta_max limit is the caller's job.
VehicleState kinematic_step(const VehicleState& state, double delta, double accel, double dt,
                            const KinematicParams& params);

/// Heading increment used by every model in the project: (dt / l) v tan(delta).
double heading_increment(double v, double delta, double dt, double wheelbase);

struct TrajectoryPoint {
    double t = 0.0;
    VehicleState state;
    friend bool operator==(const TrajectoryPoint&, const TrajectoryPoint&) = default;
};

using Trajectory = std::vector<TrajectoryPoint>;

/// Runs the PD loop and the kinematic model over a command stream, drawing
/// each dt from `process`. The PD memory starts at (u_0, v_0), so the first
/// derivative estimates are zero. Result has commands.size() + 1 points.
Trajectory simulate(const VehicleState& init, std::span<const ControlInput> commands, SamplingProcess& process,
                    const KinematicParams& params);

/// Ground-truth plant for fidelity experiments: the kinematic model with a
/// command dead zone and a first-order velocity lag instead of the PD law.
struct PlantParams {
    KinematicParams kinematic;
    double dead_zone = 0.3;  ///< |u| below this produces no drive [m/s]
    double lag = 0.4;        ///< velocity time constant tau [s]

    void validate() const;
};

/// v' = clamp(v + dt (u_eff - v) / tau, 0, v_max), u_eff = 0 inside the dead zone.
VehicleState synth_plant_step(const VehicleState& state, double delta, double u, double dt,
                              const PlantParams& params);

}  // namespace viltwin::dynamics
