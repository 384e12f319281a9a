#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "viltwin/control/manager.hpp"
#include "viltwin/control/path.hpp"
#include "viltwin/core/sampling.hpp"
#include "viltwin/dynamics/kinematic.hpp"
#include "viltwin/safety/rule_filter.hpp"
#include "viltwin/sim/lights.hpp"
#include "viltwin/twin/network.hpp"

namespace viltwin::sim {

struct Track {
    std::string name;
    control::WaypointPath path;
};

struct Crossing {
    int id = 0;
    Vec2 a, b;
    double trigger_radius = 20.0;
};

/// Stop position of a light, as arc length along the track's own direction.
struct StopLine {
    std::string track;
    double s = 0.0;
};

struct Light {
    int id = 0;
    Vec2 position;
    std::vector<StopLine> stop_lines;
    LightSchedule schedule;
};

struct PedestrianSpec {
    int id = 0;
    Vec2 home;        ///< one end of the crossing
    int crossing = 0; ///< crossing id
    double walk_speed = 1.2;
    double trigger_radius = 20.0;
    double gap = 8.0; ///< waits while a vehicle is this close to the crossing [m]
};

enum class ModelKind { kinematic, twin, bridge };
enum class ShieldKind { rule, gr1 };
enum class Direction { forward, reverse };

std::string_view to_string(ModelKind k) noexcept;
std::string_view to_string(ShieldKind k) noexcept;

struct VehicleSpec {
    int id = 0;
    ModelKind model = ModelKind::kinematic;
    std::string track;
    Direction direction = Direction::forward;
    double start_s = 0.0;  ///< start position along the route [m]
    double v0 = 0.0;
    control::ManagerConfig controller;
    safety::FilterConfig filter;
    ShieldKind shield = ShieldKind::gr1;
    dynamics::KinematicParams params;
    std::filesystem::path weights;  ///< twin only
    std::shared_ptr<const twin::TwinNetwork> network;
};

struct Scenario {
    int version = 1;
    std::string name = "unnamed";
    double scale = 1.0;
    double width = 70.0;
    double height = 30.0;
    SamplingConfig sampling;  ///< seed is supplied per run
    double hazard_horizon = 30.0;
    bool yellow_is_red = false;
    /// A vehicle that crossed a stop line on red is excused if, at the
    /// moment the light turned red, it was within v * commit_time of it.
    double commit_time = 1.0;
    /// "paper" or a strategy file; used by gr1-shielded vehicles.
    std::string strategy = "paper";
    std::vector<Track> tracks;
    std::vector<Crossing> crossings;
    std::vector<Light> lights;
    std::vector<PedestrianSpec> pedestrians;
    std::vector<VehicleSpec> vehicles;

    const Track* find_track(const std::string& name) const;
    const Crossing* find_crossing(int id) const;
    /// Throws ValidationError naming the offending field.
    void validate() const;
};

/// Lengths in the file are multiplied by its "scale"; speeds and times are
/// not. Relative paths (weights, strategy) resolve against `base_dir`.
/// Throws ValidationError with the field path on schema violations and
/// dangling references.
Scenario parse_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir);
/// Throws ValidationError when the file is missing or invalid.
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace viltwin::sim
