#pragma once

#include <span>
#include <vector>

#include "viltwin/sim/scenario.hpp"

namespace viltwin::sim {

enum class PedPhase { idle, waiting, walking };

struct PedestrianState {
    int id = 0;
    PedPhase phase = PedPhase::idle;
    Vec2 position;
    Vec2 velocity;
    bool at_a = true;           ///< which end of the crossing it stands at
    std::vector<char> inside;   ///< per vehicle: within the trigger radius last step
    std::size_t crossings = 0;  ///< completed traversals
};

PedestrianState pedestrian_init(const PedestrianSpec& spec, const Crossing& crossing);

/// A vehicle entering the trigger radius of the crossing (measured from its
/// midpoint) makes an idle pedestrian want to cross. It then waits until no
/// vehicle is within `gap` of the crossing segment and walks to the other
/// end at walk speed, where it becomes idle again.
PedestrianState pedestrian_step(const PedestrianState& ped, const PedestrianSpec& spec, const Crossing& crossing,
                                std::span<const Vec2> vehicles, double dt);

}  // namespace viltwin::sim
