#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>

#include "viltwin/dynamics/kinematic.hpp"

namespace viltwin::sim {

struct BridgeVehicleConfig {
    int id = 0;
    dynamics::VehicleState initial;
    dynamics::KinematicParams params;
    std::chrono::milliseconds timeout{10000};
    /// Hang up after this many commands (fault injection).
    std::optional<std::size_t> stop_after;
};

struct BridgeVehicleReport {
    std::size_t commands = 0;
    bool server_closed = false;
    dynamics::VehicleState final_state;
};

/// External vehicle process: subscribes to /<id>/command and answers every
/// command with /<id>/pose and /<id>/twist from its own PD loop and
/// kinematic model. Returns when the server hangs up, on timeout or after
/// `stop_after` commands. Throws IoError when the connection fails.
BridgeVehicleReport run_bridge_vehicle(const std::string& host, std::uint16_t port, const BridgeVehicleConfig& config);

}  // namespace viltwin::sim
