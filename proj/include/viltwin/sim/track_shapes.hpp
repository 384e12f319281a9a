#pragma once

#include <vector>

#include "viltwin/core/vec2.hpp"

namespace viltwin::sim {

struct RoundedRect {
    Vec2 center;
    double width = 0.0;   ///< outer extent along x [m]
    double height = 0.0;  ///< outer extent along y [m]
    double radius = 0.0;  ///< corner radius [m]
    double spacing = 1.0; ///< target distance between samples [m]
    bool clockwise = false;

    /// Throws ValidationError for non-positive sizes or a radius larger than
    /// half the shorter side.
    void validate() const;
};

/// Closed loop around the rectangle, sampled at nearly uniform arc length.
/// The first point is the middle of the bottom edge; the loop runs towards
/// +x when anticlockwise and towards -x when clockwise.
std::vector<Vec2> rounded_rect(const RoundedRect& shape);

/// Arc length of the exact shape.
double rounded_rect_length(const RoundedRect& shape);

}  // namespace viltwin::sim
