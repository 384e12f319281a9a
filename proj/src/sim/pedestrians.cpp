#include "viltwin/sim/pedestrians.hpp"

namespace viltwin::sim {

PedestrianState pedestrian_init(const PedestrianSpec& spec, const Crossing& crossing) {
    PedestrianState p;
    p.id = spec.id;
    p.at_a = distance(spec.home, crossing.a) <= distance(spec.home, crossing.b);
    p.position = p.at_a ? crossing.a : crossing.b;
    return p;
}

PedestrianState pedestrian_step(const PedestrianState& ped, const PedestrianSpec& spec, const Crossing& crossing,
                                std::span<const Vec2> vehicles, double dt) {
    PedestrianState next = ped;
    next.inside.assign(vehicles.size(), 0);
    const Vec2 mid = (crossing.a + crossing.b) * 0.5;
    bool entered = false;
    bool too_close = false;
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        next.inside[i] = distance(vehicles[i], mid) <= spec.trigger_radius;
        const bool was = i < ped.inside.size() && ped.inside[i];
        entered = entered || (next.inside[i] && !was);
        too_close = too_close || point_segment_distance(crossing.a, crossing.b, vehicles[i]) < spec.gap;
    }
    if (next.phase == PedPhase::idle && entered) next.phase = PedPhase::waiting;
    if (next.phase == PedPhase::waiting && !too_close) next.phase = PedPhase::walking;
    if (next.phase != PedPhase::walking) {
        next.velocity = {};
        return next;
    }
    const Vec2 target = next.at_a ? crossing.b : crossing.a;
    const Vec2 to = target - next.position;
    const double remaining = to.norm();
    const double step = spec.walk_speed * dt;
    const Vec2 dir = remaining > 0.0 ? to * (1.0 / remaining) : Vec2{};
    if (step >= remaining) {
        next.position = target;
        next.velocity = {};
        next.phase = PedPhase::idle;
        next.at_a = !next.at_a;
        ++next.crossings;
    } else {
        next.position = next.position + dir * step;
        next.velocity = dir * spec.walk_speed;
    }
    return next;
}

}  // namespace viltwin::sim
