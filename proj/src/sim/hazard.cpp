#include "viltwin/sim/hazard.hpp"

#include <algorithm>
#include <cmath>

#include "viltwin/core/error.hpp"

namespace viltwin::sim {

std::string_view to_string(HazardKind k) noexcept {
    switch (k) {
        case HazardKind::none:
            return "none";
        case HazardKind::red_light:
            return "red_light";
        case HazardKind::pedestrian:
            return "pedestrian";
    }
    return "none";
}

namespace {

/// Parameter along [p, q] where it meets [a, b], if they intersect.
std::optional<double> intersect(const Vec2& p, const Vec2& q, const Vec2& a, const Vec2& b) {
    const Vec2 r = q - p, s = b - a;
    const double den = r.cross(s);
    if (den == 0.0) return std::nullopt;
    const double t = (a - p).cross(s) / den;
    const double u = (a - p).cross(r) / den;
    if (t < 0.0 || t >= 1.0 || u < 0.0 || u > 1.0) return std::nullopt;
    return t;
}

}  // namespace

VehicleRoute build_route(const Scenario& scenario, const VehicleSpec& vehicle) {
    const Track* track = scenario.find_track(vehicle.track);
    if (!track) throw ValidationError("unknown track '" + vehicle.track + "'");
    const auto& fwd = track->path;
    const bool rev = vehicle.direction == Direction::reverse;
    std::vector<Vec2> pts = fwd.points();
    if (rev) std::reverse(pts.begin() + (fwd.cyclic() ? 1 : 0), pts.end());
    VehicleRoute route{control::WaypointPath(std::move(pts), fwd.cyclic()), {}, {}};
    const double len = fwd.length();
    auto map_s = [&](double s) {
        if (!rev) return s;
        return fwd.cyclic() ? route.path.wrap(len - s) : len - s;
    };
    for (std::size_t i = 0; i < scenario.lights.size(); ++i) {
        for (const auto& line : scenario.lights[i].stop_lines) {
            if (line.track == vehicle.track) route.stops.push_back({i, map_s(line.s)});
        }
    }
    const auto& rp = route.path.points();
    const std::size_t segs = route.path.segment_count();
    double base = 0.0;
    for (std::size_t k = 0; k < segs; ++k) {
        const Vec2 p = rp[k], q = rp[(k + 1) % rp.size()];
        for (std::size_t c = 0; c < scenario.crossings.size(); ++c) {
            const auto t = intersect(p, q, scenario.crossings[c].a, scenario.crossings[c].b);
            if (t) route.crossings.push_back({c, base + *t * distance(p, q)});
        }
        base += distance(p, q);
    }
    return route;
}

HazardQuery hazard_query(const VehicleRoute& route, double s, const WorldView& world, const HazardConfig& config) {
    HazardQuery best;
    auto consider = [&](HazardKind kind, double target) {
        if (!route.path.cyclic() && target < s) return;
        const double d = route.path.forward_distance(s, target);
        if (!(d >= 0.0) || d > config.horizon) return;
        if (!best.d || d < *best.d) best = {kind, d};
    };
    for (const auto& stop : route.stops) {
        const LightColor c = world.lights.at(stop.light);
        if (c == LightColor::red || (config.yellow_is_red && c == LightColor::yellow)) {
            consider(HazardKind::red_light, stop.s);
        }
    }
    for (std::size_t i = 0; i < world.pedestrians.size(); ++i) {
        if (world.pedestrians[i].phase != PedPhase::walking) continue;
        for (const auto& hit : route.crossings) {
            if (hit.crossing == world.ped_crossing.at(i)) consider(HazardKind::pedestrian, hit.s);
        }
    }
    return best;
}

}  // namespace viltwin::sim
