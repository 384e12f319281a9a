#include "viltwin/core/message.hpp"

#include <array>
#include <cmath>

#include "viltwin/core/error.hpp"

namespace viltwin {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 7> kKindNames = {"pose",  "twist",      "path",   "sensor",
                                                        "light", "pedestrian", "command"};
constexpr std::array<std::string_view, 3> kColorNames = {"red", "yellow", "green"};

const json& field(const json& obj, const char* name) {
    auto it = obj.find(name);
    if (it == obj.end()) throw ValidationError(std::string("missing field '") + name + "'");
    return *it;
}

double number(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_number()) throw ValidationError(std::string("field '") + name + "' must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw ValidationError(std::string("field '") + name + "' must be finite");
    return d;
}

int integer(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_number_integer()) throw ValidationError(std::string("field '") + name + "' must be an integer");
    return v.get<int>();
}

std::string string_field(const json& obj, const char* name) {
    const json& v = field(obj, name);
    if (!v.is_string()) throw ValidationError(std::string("field '") + name + "' must be a string");
    return v.get<std::string>();
}

Vec2 vec2(const json& v, const char* name) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        throw ValidationError(std::string("field '") + name + "' must be a [x, y] pair");
    }
    return {v[0].get<double>(), v[1].get<double>()};
}

json vec2_json(const Vec2& p) { return json::array({p.x, p.y}); }

}  // namespace

std::string_view to_string(MessageKind kind) noexcept { return kKindNames[static_cast<std::size_t>(kind)]; }

MessageKind message_kind_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kKindNames.size(); ++i) {
        if (kKindNames[i] == name) return static_cast<MessageKind>(i);
    }
    throw ValidationError("unknown message kind '" + std::string(name) + "'");
}

std::string_view to_string(LightColor color) noexcept { return kColorNames[static_cast<std::size_t>(color)]; }

LightColor light_color_from_string(std::string_view name) {
    for (std::size_t i = 0; i < kColorNames.size(); ++i) {
        if (kColorNames[i] == name) return static_cast<LightColor>(i);
    }
    throw ValidationError("unknown light color '" + std::string(name) + "'");
}

MessageKind kind_of(const Payload& payload) noexcept { return static_cast<MessageKind>(payload.index()); }

json payload_to_json(const Payload& payload) {
    struct Visitor {
        json operator()(const PoseMsg& m) const {
            return {{"id", m.id}, {"x", m.x}, {"y", m.y}, {"theta", m.theta}};
        }
        json operator()(const TwistMsg& m) const { return {{"id", m.id}, {"v", m.v}, {"omega", m.omega}}; }
        json operator()(const PathMsg& m) const {
            json pts = json::array();
            for (const auto& p : m.points) pts.push_back(vec2_json(p));
            return {{"id", m.id}, {"points", std::move(pts)}, {"cyclic", m.cyclic}};
        }
        json operator()(const SensorMsg& m) const {
            json vs = json::array();
            for (const auto& o : m.vehicles) {
                vs.push_back({{"id", o.id}, {"x", o.x}, {"y", o.y}, {"theta", o.theta}, {"v", o.v}});
            }
            json out = {{"id", m.id}, {"vehicles", std::move(vs)}, {"hazard", m.hazard}};
            out["hazard_d"] = m.hazard_d ? json(*m.hazard_d) : json(nullptr);
            return out;
        }
        json operator()(const LightMsg& m) const {
            return {{"id", m.id}, {"color", to_string(m.color)}, {"position", vec2_json(m.position)}};
        }
        json operator()(const PedestrianMsg& m) const {
            return {{"id", m.id}, {"velocity", vec2_json(m.velocity)}, {"position", vec2_json(m.position)}};
        }
        json operator()(const CommandMsg& m) const {
            return {{"id", m.id},       {"delta", m.delta}, {"u", m.u},
                    {"v_cmd", m.v_cmd}, {"dt", m.dt},       {"drive_state", m.drive_state}};
        }
    };
    return std::visit(Visitor{}, payload);
}

Payload payload_from_json(MessageKind kind, const json& data) {
    if (!data.is_object()) throw ValidationError("message data must be an object");
    switch (kind) {
        case MessageKind::pose:
            return PoseMsg{integer(data, "id"), number(data, "x"), number(data, "y"), number(data, "theta")};
        case MessageKind::twist:
            return TwistMsg{integer(data, "id"), number(data, "v"), number(data, "omega")};
        case MessageKind::path: {
            PathMsg m;
            m.id = integer(data, "id");
            const json& pts = field(data, "points");
            if (!pts.is_array()) throw ValidationError("field 'points' must be an array");
            for (const auto& p : pts) m.points.push_back(vec2(p, "points"));
            const json& cyclic = field(data, "cyclic");
            if (!cyclic.is_boolean()) throw ValidationError("field 'cyclic' must be a boolean");
            m.cyclic = cyclic.get<bool>();
            return m;
        }
        case MessageKind::sensor: {
            SensorMsg m;
            m.id = integer(data, "id");
            const json& vs = field(data, "vehicles");
            if (!vs.is_array()) throw ValidationError("field 'vehicles' must be an array");
            for (const auto& o : vs) {
                m.vehicles.push_back({integer(o, "id"), number(o, "x"), number(o, "y"), number(o, "theta"),
                                      number(o, "v")});
            }
            m.hazard = string_field(data, "hazard");
            const json& d = field(data, "hazard_d");
            if (!d.is_null()) m.hazard_d = number(data, "hazard_d");
            return m;
        }
        case MessageKind::light:
            return LightMsg{integer(data, "id"), light_color_from_string(string_field(data, "color")),
                            vec2(field(data, "position"), "position")};
        case MessageKind::pedestrian:
            return PedestrianMsg{integer(data, "id"), vec2(field(data, "velocity"), "velocity"),
                                 vec2(field(data, "position"), "position")};
        case MessageKind::command:
            return CommandMsg{integer(data, "id"), number(data, "delta"), number(data, "u"),
                              number(data, "v_cmd"),  number(data, "dt"),   string_field(data, "drive_state")};
    }
    throw ValidationError("unhandled message kind");
}

}  // namespace viltwin
