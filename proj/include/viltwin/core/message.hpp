#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "viltwin/core/vec2.hpp"

namespace viltwin {

enum class MessageKind { pose, twist, path, sensor, light, pedestrian, command };

std::string_view to_string(MessageKind kind) noexcept;
/// Throws ValidationError for an unknown name.
MessageKind message_kind_from_string(std::string_view name);

enum class LightColor { red, yellow, green };

std::string_view to_string(LightColor color) noexcept;
LightColor light_color_from_string(std::string_view name);

struct PoseMsg {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    friend bool operator==(const PoseMsg&, const PoseMsg&) = default;
};

struct TwistMsg {
    int id = 0;
    double v = 0.0;      ///< longitudinal speed [m/s]
    double omega = 0.0;  ///< yaw rate [rad/s]
    friend bool operator==(const TwistMsg&, const TwistMsg&) = default;
};

struct PathMsg {
    int id = 0;
    std::vector<Vec2> points;
    bool cyclic = true;
    friend bool operator==(const PathMsg&, const PathMsg&) = default;
};

/// One other vehicle as seen by a virtual sensor.
struct TrackedObject {
    int id = 0;
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;
    double v = 0.0;
    friend bool operator==(const TrackedObject&, const TrackedObject&) = default;
};

struct SensorMsg {
    int id = 0;
    std::vector<TrackedObject> vehicles;
    std::string hazard = "none";      ///< red_light | pedestrian | none
    std::optional<double> hazard_d;   ///< along-path distance, absent when hazard is none
    friend bool operator==(const SensorMsg&, const SensorMsg&) = default;
};

struct LightMsg {
    int id = 0;
    LightColor color = LightColor::red;
    Vec2 position;
    friend bool operator==(const LightMsg&, const LightMsg&) = default;
};

struct PedestrianMsg {
    int id = 0;
    Vec2 velocity;
    Vec2 position;
    friend bool operator==(const PedestrianMsg&, const PedestrianMsg&) = default;
};

struct CommandMsg {
    int id = 0;
    double delta = 0.0;   ///< steering command [rad]
    double u = 0.0;       ///< filtered velocity command [m/s]
    double v_cmd = 0.0;   ///< nominal velocity command before the shield [m/s]
    double dt = 0.0;      ///< interval the command is applied over [s]
    std::string drive_state;  ///< MOV | DCL | STP, empty for the rule filter
    friend bool operator==(const CommandMsg&, const CommandMsg&) = default;
};

/// Alternative order follows MessageKind.
using Payload = std::variant<PoseMsg, TwistMsg, PathMsg, SensorMsg, LightMsg, PedestrianMsg, CommandMsg>;

MessageKind kind_of(const Payload& payload) noexcept;

struct Message {
    double t = 0.0;
    std::string topic;
    Payload payload;

    MessageKind kind() const noexcept { return kind_of(payload); }
    friend bool operator==(const Message&, const Message&) = default;
};

nlohmann::json payload_to_json(const Payload& payload);
/// Throws ValidationError when `data` does not match the schema of `kind`.
Payload payload_from_json(MessageKind kind, const nlohmann::json& data);

}  // namespace viltwin
