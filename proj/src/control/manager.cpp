#include "viltwin/control/manager.hpp"

#include <algorithm>

namespace viltwin::control {

void ManagerConfig::validate() const {
    pp.validate();
    acc.validate();
    if (!(lateral_gap > 0.0) || !(leader_horizon > 0.0)) {
        throw ValidationError("leader gap and horizon must be positive");
    }
}

std::optional<double> leader_distance(const WaypointPath& path, double ego_s, int ego_id,
                                      const std::vector<TrackedObject>& vehicles, double lateral_gap,
                                      double horizon) {
    std::optional<double> best;
    for (const auto& obj : vehicles) {
        if (obj.id == ego_id) continue;
        const auto proj = path.project_near({obj.x, obj.y}, ego_s, 0.0, horizon);
        if (proj.distance >= lateral_gap || !(proj.offset > 0.0)) continue;
        if (!best || proj.offset < *best) best = proj.offset;
    }
    return best;
}

ControllerManager::ControllerManager(int id, WaypointPath path, ManagerConfig config)
    : id_(id), config_(config), tracker_(std::move(path), config.pp.lookahead) {
    config_.validate();
}

ManagerOutput ControllerManager::step(const dynamics::VehicleState& pose, const std::vector<TrackedObject>& vehicles) {
    const Lookahead la = tracker_.update({pose.x, pose.y});
    ManagerOutput out;
    out.delta = pure_pursuit(pose, la.point, config_.pp);
    out.leader_distance = leader_distance(tracker_.path(), la.s_projection, id_, vehicles, config_.lateral_gap,
                                          config_.leader_horizon);
    out.v_cmd = acc_speed(out.leader_distance, config_.acc);
    if (hook_) out.v_cmd = std::clamp(hook_(pose, out.v_cmd), 0.0, config_.acc.v_nom);
    return out;
}

}  // namespace viltwin::control
