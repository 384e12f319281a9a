#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "viltwin/control/path.hpp"
#include "viltwin/sim/pedestrians.hpp"
#include "viltwin/sim/scenario.hpp"

namespace viltwin::sim {

enum class HazardKind { none, red_light, pedestrian };
std::string_view to_string(HazardKind k) noexcept;

struct HazardQuery {
    HazardKind kind = HazardKind::none;
    std::optional<double> d;  ///< along-path distance to the stop point [m]
};

/// A vehicle's path with the hazard stop points on it.
struct VehicleRoute {
    struct Stop {
        std::size_t light;  ///< index into Scenario::lights
        double s;
    };
    struct Hit {
        std::size_t crossing;  ///< index into Scenario::crossings
        double s;
    };
    control::WaypointPath path;
    std::vector<Stop> stops;
    std::vector<Hit> crossings;
};

/// The vehicle's track in its direction of travel (a reversed track starts
/// at the same point), with stop lines and crossing intersections mapped
/// onto it. Throws ValidationError for an unknown track.
VehicleRoute build_route(const Scenario& scenario, const VehicleSpec& vehicle);

struct WorldView {
    std::vector<LightColor> lights;            ///< parallel to Scenario::lights
    std::vector<PedestrianState> pedestrians;  ///< parallel to Scenario::pedestrians
    std::vector<std::size_t> ped_crossing;     ///< crossing index of each pedestrian
};

struct HazardConfig {
    double horizon = 30.0;
    bool yellow_is_red = false;
};

/// Nearest of: red stop lines ahead within the horizon, and crossings ahead
/// within the horizon with a pedestrian walking on them. `s` is the
/// vehicle's arc length on the route. Never reports anything behind it.
HazardQuery hazard_query(const VehicleRoute& route, double s, const WorldView& world, const HazardConfig& config);

}  // namespace viltwin::sim
