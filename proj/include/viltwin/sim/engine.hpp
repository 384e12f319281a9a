#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "viltwin/core/bag.hpp"
#include "viltwin/dynamics/kinematic.hpp"
#include "viltwin/sim/scenario.hpp"

namespace viltwin::sim {

struct VehicleMetrics {
    int id = 0;
    int laps = 0;
    double distance = 0.0;          ///< along-path progress [m]
    int red_light_violations = 0;
    int compliance_failures = 0;    ///< steps still moving 2 s into an urgent red light
    int assumption_violations = 0;  ///< shield inputs outside the env assumptions
    dynamics::Trajectory trajectory;
};

struct RunMetrics {
    std::size_t steps = 0;
    double duration = 0.0;
    int red_light_violations = 0;
    int compliance_failures = 0;
    /// Infinity when the quantity was never sampled.
    double min_pedestrian_clearance = std::numeric_limits<double>::infinity();
    double min_vehicle_clearance = std::numeric_limits<double>::infinity();
    std::vector<VehicleMetrics> vehicles;

    const VehicleMetrics* vehicle(int id) const;
};

struct EngineOptions {
    double duration = 120.0;
    std::uint64_t seed = 0;
    /// Stream the bag here as the run progresses, so an aborted run leaves a
    /// readable prefix on disk.
    std::optional<std::filesystem::path> bag_path;
    /// Bridge port (0 = any free port). A bridge is opened whenever the
    /// scenario has a bridge vehicle or this is set.
    std::optional<std::uint16_t> bridge_port;
    /// Called with the bound port before waiting for clients.
    std::function<void(std::uint16_t)> on_bridge_ready;
    std::chrono::milliseconds bridge_grace{5000};
    std::chrono::milliseconds bridge_timeout{5000};
};

struct RunResult {
    Bag bag;
    RunMetrics metrics;
};

/// The run stopped early; `partial` holds everything recorded so far.
class RunAborted : public Error {
public:
    RunAborted(const std::string& what, Bag partial) : Error(what), partial_(std::move(partial)) {}
    const Bag& partial() const noexcept { return partial_; }

private:
    Bag partial_;
};

/// Runs the closed loop until the clock reaches `duration`. Each step: draw
/// dt; advance lights and pedestrians; publish lights, pedestrians, sensor
/// snapshots (and paths on the first step); per vehicle the controller
/// manager, the shield and the model; advance the clock; publish poses and
/// twists; drain the bus into the bag. The bag is a function of
/// (scenario, duration, seed) only.
RunResult engine_run(const Scenario& scenario, const EngineOptions& options);

/// Initial pose of a vehicle on its route.
dynamics::VehicleState initial_state(const Scenario& scenario, const VehicleSpec& vehicle);

nlohmann::json metrics_to_json(const RunMetrics& metrics);

}  // namespace viltwin::sim
