#include "viltwin/control/pure_pursuit.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "viltwin/core/error.hpp"

namespace viltwin::control {

void PpConfig::validate() const {
    if (!(lookahead > 0.0)) throw ValidationError("lookahead distance must be positive");
    if (!(wheelbase > 0.0)) throw ValidationError("wheelbase must be positive");
    if (!(delta_max > 0.0) || delta_max >= std::numbers::pi / 2) throw ValidationError("delta_max must lie in (0, pi/2)");
}

double pure_pursuit(const dynamics::VehicleState& pose, const Vec2& target, const PpConfig& config) {
    const Vec2 d = target - Vec2{pose.x, pose.y};
    const double L = d.norm();
    if (!(L > 0.0)) throw ValidationError("pure pursuit target coincides with the vehicle position");
    const double c = std::cos(pose.theta);
    const double s = std::sin(pose.theta);
    const double forward = c * d.x + s * d.y;
    const double left = -s * d.x + c * d.y;
    const double alpha = std::atan2(left, forward);
    const double kappa = 2.0 * std::sin(alpha) / L;
    return std::clamp(std::atan(config.wheelbase * kappa), -config.delta_max, config.delta_max);
}

}  // namespace viltwin::control
