#include "viltwin/sim/bridge_vehicle.hpp"

#include "viltwin/core/bridge.hpp"

namespace viltwin::sim {

BridgeVehicleReport run_bridge_vehicle(const std::string& host, std::uint16_t port, const BridgeVehicleConfig& config) {
    config.params.validate();
    auto client = BridgeClient::connect(host, port);
    const std::string prefix = "/" + std::to_string(config.id) + "/";
    client.subscribe(prefix + "command");
    BridgeVehicleReport rep;
    dynamics::VehicleState state = config.initial;
    dynamics::PdMemory mem{state.v, state.v};
    while (true) {
        if (config.stop_after && rep.commands >= *config.stop_after) {
            client.close();
            break;
        }
        const auto ev = client.receive(config.timeout);
        if (!ev) break;
        if (ev->type == BridgeEvent::Type::closed) {
            rep.server_closed = true;
            break;
        }
        if (ev->type != BridgeEvent::Type::message || !ev->message) continue;
        const auto* cmd = std::get_if<CommandMsg>(&ev->message->payload);
        if (!cmd || cmd->id != config.id) continue;
        const auto pd = dynamics::pd_accel(cmd->u, state.v, mem, cmd->dt, config.params);
        const double omega =
            dynamics::heading_increment(state.v, cmd->delta, cmd->dt, config.params.wheelbase) / cmd->dt;
        state = dynamics::kinematic_step(state, cmd->delta, pd.accel, cmd->dt, config.params);
        mem = pd.memory;
        client.publish(prefix + "pose", PoseMsg{config.id, state.x, state.y, state.theta});
        client.publish(prefix + "twist", TwistMsg{config.id, state.v, omega});
        ++rep.commands;
    }
    rep.final_state = state;
    return rep;
}

}  // namespace viltwin::sim
