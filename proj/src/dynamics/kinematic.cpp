#include "viltwin/dynamics/kinematic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "viltwin/core/error.hpp"

namespace viltwin::dynamics {

namespace {

void require_dt(double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt)) {
        throw ValidationError("time step must be positive and finite, got " + std::to_string(dt));
    }
}

void require_steer(double delta) {
    if (!std::isfinite(delta) || std::abs(delta) >= std::numbers::pi / 2) {
        throw ValidationError("steering angle must satisfy |delta| < pi/2, got " + std::to_string(delta));
    }
}

}  // namespace

void KinematicParams::validate() const {
    if (!(wheelbase > 0.0)) throw ValidationError("wheelbase must be positive");
    if (!(kp >= 0.0) || !(kd >= 0.0)) throw ValidationError("PD gains must be non-negative");
    if (!(delta_max > 0.0) || delta_max >= std::numbers::pi / 2) {
        throw ValidationError("delta_max must lie in (0, pi/2)");
    }
    if (!(v_max >= 0.0)) throw ValidationError("v_max must be non-negative");
}

void PlantParams::validate() const {
    kinematic.validate();
    if (!(lag > 0.0)) throw ValidationError("plant lag must be positive");
    if (!(dead_zone >= 0.0)) throw ValidationError("plant dead zone must be non-negative");
}

PdResult pd_accel(double u, double v, const PdMemory& mem, double dt, const KinematicParams& params) {
    require_dt(dt);
    const double du = (u - mem.u_prev) / dt;
    const double dv = (v - mem.v_prev) / dt;
    const double a = params.kp * (u - v) + params.kd * (du - dv);
    return {a, PdMemory{u, v}};
}

double heading_increment(double v, double delta, double dt, double wheelbase) {
    return dt / wheelbase * v * std::tan(delta);
}

VehicleState kinematic_step(const VehicleState& s, double delta, double accel, double dt,
                            const KinematicParams& params) {
    require_dt(dt);
    require_steer(delta);
    VehicleState next;
    next.x = s.x + dt * s.v * std::cos(s.theta);
    next.y = s.y + dt * s.v * std::sin(s.theta);
    next.theta = s.theta + heading_increment(s.v, delta, dt, params.wheelbase);
    next.v = std::clamp(s.v + dt * accel, 0.0, params.v_max);
    return next;
}

Trajectory simulate(const VehicleState& init, std::span<const ControlInput> commands, SamplingProcess& process,
                    const KinematicParams& params) {
    if (commands.empty()) throw ValidationError("simulate needs at least one command");
    params.validate();
    Trajectory out;
    out.reserve(commands.size() + 1);
    double t = 0.0;
    VehicleState state = init;
    PdMemory mem{commands.front().u, init.v};
    out.push_back({t, state});
    for (const auto& cmd : commands) {
        const double dt = process.sample();
        const PdResult pd = pd_accel(cmd.u, state.v, mem, dt, params);
        mem = pd.memory;
        state = kinematic_step(state, cmd.delta, pd.accel, dt, params);
        t += dt;
        out.push_back({t, state});
    }
    return out;
}

VehicleState synth_plant_step(const VehicleState& s, double delta, double u, double dt, const PlantParams& params) {
    require_dt(dt);
    require_steer(delta);
    if (!(params.lag > 0.0)) throw ValidationError("plant lag must be positive");
    const double u_eff = std::abs(u) < params.dead_zone ? 0.0 : u;
    VehicleState next;
    next.x = s.x + dt * s.v * std::cos(s.theta);
    next.y = s.y + dt * s.v * std::sin(s.theta);
    next.theta = s.theta + heading_increment(s.v, delta, dt, params.kinematic.wheelbase);
    next.v = std::clamp(s.v + dt * (u_eff - s.v) / params.lag, 0.0, params.kinematic.v_max);
    return next;
}

}  // namespace viltwin::dynamics
