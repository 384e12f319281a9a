#pragma once

#include "viltwin/core/message.hpp"

namespace viltwin::sim {

/// Cycles red -> yellow -> green -> red, starting at `initial` at t = 0.
struct LightSchedule {
    LightColor initial = LightColor::red;
    double red = 5.0;
    double yellow = 2.0;
    double green = 10.0;

    /// Throws ValidationError unless every dwell is positive and finite.
    void validate() const;
    double period() const noexcept { return red + yellow + green; }
    double dwell(LightColor c) const noexcept;
};

/// Color at time t. Throws ValidationError for t < 0.
LightColor light_color(const LightSchedule& schedule, double t);

}  // namespace viltwin::sim
