#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "viltwin/control/acc.hpp"
#include "viltwin/control/path.hpp"
#include "viltwin/control/pure_pursuit.hpp"
#include "viltwin/core/message.hpp"
#include "viltwin/dynamics/kinematic.hpp"

namespace viltwin::control {

struct ManagerConfig {
    PpConfig pp{};
    AccConfig acc{};
    double lateral_gap = 1.5;      ///< max lateral offset of a same-lane leader [m]
    double leader_horizon = 30.0;  ///< how far ahead leaders are searched [m]

    void validate() const;
};

struct ManagerOutput {
    double delta = 0.0;
    double v_cmd = 0.0;
    std::optional<double> leader_distance;  ///< along-path gap to the leader [m]
};

/// Along-path distance to the nearest vehicle ahead of arc length `ego_s`
/// whose lateral offset from the path is below the gap. Vehicles behind the
/// ego or beyond the horizon are ignored; `ego_id` is skipped.
std::optional<double> leader_distance(const WaypointPath& path, double ego_s, int ego_id,
                                      const std::vector<TrackedObject>& vehicles, double lateral_gap,
                                      double horizon);

/// Optional hook replacing the built-in speed channel; receives the ACC
/// output and may return any speed in [0, v_nom].
using SpeedHook = std::function<double(const dynamics::VehicleState&, double v_acc)>;

/// One controller manager per vehicle: odometry, pure pursuit and ACC.
class ControllerManager {
public:
    ControllerManager(int id, WaypointPath path, ManagerConfig config);

    /// Steering and nominal speed for the current pose and sensor snapshot.
    ManagerOutput step(const dynamics::VehicleState& pose, const std::vector<TrackedObject>& vehicles);

    void set_speed_hook(SpeedHook hook) { hook_ = std::move(hook); }

    int id() const noexcept { return id_; }
    const PathTracker& tracker() const noexcept { return tracker_; }
    const ManagerConfig& config() const noexcept { return config_; }

private:
    int id_;
    ManagerConfig config_;
    PathTracker tracker_;
    SpeedHook hook_;
};

}  // namespace viltwin::control
