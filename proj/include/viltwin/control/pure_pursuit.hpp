#pragma once

#include "viltwin/core/vec2.hpp"
#include "viltwin/dynamics/kinematic.hpp"

namespace viltwin::control {

struct PpConfig {
    double lookahead = 2.0;    ///< L_d [m]
    double wheelbase = 0.32;   ///< l [m]
    double delta_max = 0.4189; ///< steering clamp [rad]

    void validate() const;
};

/// kappa = 2 sin(alpha) / L, delta = atan(l kappa), clamped to +-delta_max,
/// where alpha is the target bearing in the body frame and L the distance to
/// it. Throws ValidationError when the target coincides with the pose.
double pure_pursuit(const dynamics::VehicleState& pose, const Vec2& target, const PpConfig& config);

}  // namespace viltwin::control
