#pragma once

#include <optional>

namespace viltwin::control {

struct AccConfig {
    double d_min = 5.0;   ///< standstill gap [m]
    double t_safe = 1.5;  ///< time gap [s]
    double v_nom = 3.0;   ///< free-road speed [m/s]

    void validate() const;
};

/// Constant time-gap speed: v_nom on a free road, otherwise
/// clamp((d - d_min) / t_safe, 0, v_nom). Throws ValidationError for d < 0.
double acc_speed(std::optional<double> leader_distance, const AccConfig& config);

}  // namespace viltwin::control
