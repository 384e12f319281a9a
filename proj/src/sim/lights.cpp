#include "viltwin/sim/lights.hpp"

#include <cmath>

#include "viltwin/core/error.hpp"

namespace viltwin::sim {

void LightSchedule::validate() const {
    for (double d : {red, yellow, green}) {
        if (!(d > 0.0) || !std::isfinite(d)) throw ValidationError("light dwell durations must be positive");
    }
}

double LightSchedule::dwell(LightColor c) const noexcept {
    switch (c) {
        case LightColor::red:
            return red;
        case LightColor::yellow:
            return yellow;
        case LightColor::green:
            return green;
    }
    return red;
}

LightColor light_color(const LightSchedule& schedule, double t) {
    if (!(t >= 0.0)) throw ValidationError("light_color: t must be non-negative");
    schedule.validate();
    double offset = 0.0;
    if (schedule.initial == LightColor::yellow) offset = schedule.red;
    if (schedule.initial == LightColor::green) offset = schedule.red + schedule.yellow;
    const double phase = std::fmod(t + offset, schedule.period());
    if (phase < schedule.red) return LightColor::red;
    if (phase < schedule.red + schedule.yellow) return LightColor::yellow;
    return LightColor::green;
}

}  // namespace viltwin::sim
