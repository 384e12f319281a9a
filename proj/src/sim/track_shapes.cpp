#include "viltwin/sim/track_shapes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "viltwin/core/error.hpp"

namespace viltwin::sim {

void RoundedRect::validate() const {
    if (!(width > 0.0) || !(height > 0.0) || !std::isfinite(width) || !std::isfinite(height)) {
        throw ValidationError("rounded_rect: width and height must be positive");
    }
    if (!(radius >= 0.0) || radius > 0.5 * std::min(width, height)) {
        throw ValidationError("rounded_rect: radius must be in [0, min(width, height) / 2]");
    }
    if (!(spacing > 0.0)) throw ValidationError("rounded_rect: spacing must be positive");
    if (!std::isfinite(center.x) || !std::isfinite(center.y)) throw ValidationError("rounded_rect: bad center");
}

namespace {

struct Piece {
    bool arc;
    Vec2 a;         // line start, or arc center
    Vec2 b;         // line end
    double angle0;  // arc start angle
    double length;
};

std::vector<Piece> pieces(const RoundedRect& r) {
    const double hw = 0.5 * r.width, hh = 0.5 * r.height, rad = r.radius;
    const double q = 0.5 * std::numbers::pi * rad;
    auto line = [](Vec2 a, Vec2 b) { return Piece{false, a, b, 0.0, distance(a, b)}; };
    auto arc = [&](Vec2 c, double a0) { return Piece{true, c, {}, a0, q}; };
    const double pi = std::numbers::pi;
    return {
        line({0.0, -hh}, {hw - rad, -hh}),
        arc({hw - rad, -hh + rad}, -0.5 * pi),
        line({hw, -hh + rad}, {hw, hh - rad}),
        arc({hw - rad, hh - rad}, 0.0),
        line({hw - rad, hh}, {-hw + rad, hh}),
        arc({-hw + rad, hh - rad}, 0.5 * pi),
        line({-hw, hh - rad}, {-hw, -hh + rad}),
        arc({-hw + rad, -hh + rad}, pi),
        line({-hw + rad, -hh}, {0.0, -hh}),
    };
}

Vec2 eval(const Piece& p, double u, double rad) {
    if (!p.arc) return p.length == 0.0 ? p.a : p.a + (p.b - p.a) * (u / p.length);
    const double ang = p.angle0 + (rad > 0.0 ? u / rad : 0.0);
    return {p.a.x + rad * std::cos(ang), p.a.y + rad * std::sin(ang)};
}

}  // namespace

double rounded_rect_length(const RoundedRect& shape) {
    shape.validate();
    double total = 0.0;
    for (const auto& p : pieces(shape)) total += p.length;
    return total;
}

std::vector<Vec2> rounded_rect(const RoundedRect& shape) {
    shape.validate();
    const auto ps = pieces(shape);
    double total = 0.0;
    for (const auto& p : ps) total += p.length;
    const auto n = std::max<std::size_t>(8, static_cast<std::size_t>(std::llround(total / shape.spacing)));
    std::vector<Vec2> out;
    out.reserve(n);
    std::size_t k = 0;
    double base = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double s = total * static_cast<double>(i) / static_cast<double>(n);
        while (k + 1 < ps.size() && s >= base + ps[k].length) base += ps[k++].length;
        Vec2 p = eval(ps[k], s - base, shape.radius);
        if (shape.clockwise) p.x = -p.x;
        out.push_back(shape.center + p);
    }
    return out;
}

}  // namespace viltwin::sim
