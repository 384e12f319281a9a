#include "viltwin/twin/twin_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "viltwin/core/error.hpp"

namespace viltwin::twin {

TwinStepResult twin_step(const TwinNetwork& net, const HistoryWindow& window, const dynamics::VehicleState& state,
                         double delta, double u, double dt, const dynamics::KinematicParams& params) {
    const auto T = static_cast<std::size_t>(net.shape.window);
    if (window.u.size() != T || window.v.size() != T) {
        throw ValidationError("twin window holds " + std::to_string(window.u.size()) + " entries, network needs " +
                              std::to_string(T));
    }
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ValidationError("time step must be positive and finite");
    if (!std::isfinite(delta) || std::abs(delta) >= 1.5707963267948966) {
        throw ValidationError("steering angle must satisfy |delta| < pi/2");
    }

    TwinStepResult out;
    out.window.u.reserve(T);
    out.window.v.reserve(T);
    out.window.u.assign(window.u.begin() + 1, window.u.end());
    out.window.v.assign(window.v.begin() + 1, window.v.end());
    out.window.u.push_back(u);
    out.window.v.push_back(state.v);

    const double v_next = std::clamp(forward(net, out.window), 0.0, params.v_max);
    out.state.x = state.x + dt * state.v * std::cos(state.theta);
    out.state.y = state.y + dt * state.v * std::sin(state.theta);
    out.state.theta = state.theta + dynamics::heading_increment(state.v, delta, dt, params.wheelbase);
    out.state.v = v_next;
    return out;
}

double kinematic_baseline_predict(const HistoryWindow& w, double dt, const dynamics::KinematicParams& params) {
    const std::size_t T = w.size();
    if (T == 0 || w.v.size() != T) throw ValidationError("baseline needs a non-empty window");
    const dynamics::PdMemory mem = T >= 2 ? dynamics::PdMemory{w.u[T - 2], w.v[T - 2]}
                                          : dynamics::PdMemory{w.u[0], w.v[0]};
    const double a = dynamics::pd_accel(w.u[T - 1], w.v[T - 1], mem, dt, params).accel;
    return std::clamp(w.v[T - 1] + dt * a, 0.0, params.v_max);
}

}  // namespace viltwin::twin
