#include "viltwin/control/acc.hpp"

#include <algorithm>
#include <cmath>

#include "viltwin/core/error.hpp"

namespace viltwin::control {

void AccConfig::validate() const {
    if (!(d_min > 0.0) || !(t_safe > 0.0) || !(v_nom > 0.0)) {
        throw ValidationError("ACC d_min, t_safe and v_nom must be positive");
    }
}

double acc_speed(std::optional<double> leader_distance, const AccConfig& config) {
    if (!leader_distance) return config.v_nom;
    const double d = *leader_distance;
    if (!(d >= 0.0)) throw ValidationError("leader distance must be non-negative");
    return std::clamp((d - config.d_min) / config.t_safe, 0.0, config.v_nom);
}

}  // namespace viltwin::control
