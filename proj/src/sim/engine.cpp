#include "viltwin/sim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <memory>

#include "viltwin/control/manager.hpp"
#include "viltwin/core/bridge.hpp"
#include "viltwin/core/bus.hpp"
#include "viltwin/safety/gr1_solver.hpp"
#include "viltwin/safety/rule_filter.hpp"
#include "viltwin/sim/hazard.hpp"
#include "viltwin/sim/pedestrians.hpp"
#include "viltwin/twin/twin_model.hpp"

namespace viltwin::sim {

const VehicleMetrics* RunMetrics::vehicle(int id) const {
    for (const auto& v : vehicles) {
        if (v.id == id) return &v;
    }
    return nullptr;
}

dynamics::VehicleState initial_state(const Scenario& scenario, const VehicleSpec& vehicle) {
    const VehicleRoute route = build_route(scenario, vehicle);
    const Vec2 p = route.path.point_at(vehicle.start_s);
    return {p.x, p.y, route.path.heading_at(vehicle.start_s), vehicle.v0};
}

namespace {

bool stops_traffic(LightColor c, bool yellow_is_red) {
    return c == LightColor::red || (yellow_is_red && c == LightColor::yellow);
}

struct Vehicle {
    Vehicle(const Scenario& sc, const VehicleSpec& s)
        : spec(&s), route(build_route(sc, s)), manager(s.id, route.path, s.controller),
          odo(route.path, s.controller.pp.lookahead), state(initial_state(sc, s)),
          prefix("/" + std::to_string(s.id) + "/") {
        pd = {state.v, state.v};
        if (s.model == ModelKind::twin) window = twin::HistoryWindow::zeros(s.network->shape.window);
        excused.assign(route.stops.size(), 0);
        metrics.id = s.id;
    }

    const VehicleSpec* spec;
    VehicleRoute route;
    control::ControllerManager manager;
    control::PathTracker odo;
    dynamics::VehicleState state;
    dynamics::PdMemory pd;
    std::optional<twin::HistoryWindow> window;
    std::optional<safety::DriveShield> shield;
    double omega = 0.0;
    std::string prefix;
    SubscriberId pose_sub = 0, twist_sub = 0;
    std::vector<char> excused;
    std::optional<double> urgent_since;
    HazardQuery hazard;
    VehicleMetrics metrics;

    TrackedObject tracked() const { return {spec->id, state.x, state.y, state.theta, state.v}; }
    Vec2 position() const { return {state.x, state.y}; }
};

class Engine {
public:
    Engine(const Scenario& sc, const EngineOptions& opt) : sc_(sc), opt_(opt), bus_(clock_) {
        sc_.validate();
        if (!(opt_.duration >= 0.0) || !std::isfinite(opt_.duration)) {
            throw ValidationError("duration must be non-negative");
        }
        bag_.metadata = {opt_.seed, sc_.name, 1, ""};
        if (opt_.bag_path) writer_.emplace(*opt_.bag_path, bag_.metadata);
    }

    RunResult run() {
        setup();
        SamplingProcess sampling({sc_.sampling.delta_nom, sc_.sampling.jitter, opt_.seed});
        prev_colors_.assign(sc_.lights.size(), std::nullopt);
        std::size_t step = 0;
        while (clock_.now() < opt_.duration) {
            do_step(sampling.sample(), step == 0);
            ++step;
        }
        metrics_.steps = step;
        metrics_.duration = clock_.now();
        for (auto& v : vehicles_) {
            v->metrics.laps = v->odo.laps();
            v->metrics.distance = v->odo.progress();
            metrics_.red_light_violations += v->metrics.red_light_violations;
            metrics_.compliance_failures += v->metrics.compliance_failures;
            metrics_.vehicles.push_back(std::move(v->metrics));
        }
        return {std::move(bag_), std::move(metrics_)};
    }

private:
    void setup() {
        const bool any_gr1 = std::any_of(sc_.vehicles.begin(), sc_.vehicles.end(),
                                         [](const auto& v) { return v.shield == ShieldKind::gr1; });
        if (any_gr1) {
            if (sc_.strategy == "paper") {
                auto res = safety::solve_gr1(safety::build_paper_spec());
                if (!res.realizable) throw ValidationError("drive-state spec is unrealizable: " + res.reason);
                strategy_.emplace(std::move(*res.strategy));
            } else {
                strategy_.emplace(safety::load_strategy(sc_.strategy));
            }
        }
        if (!sc_.lights.empty()) bus_.advertise("/light", MessageKind::light);
        if (!sc_.pedestrians.empty()) bus_.advertise("/pedestrian", MessageKind::pedestrian);
        bool any_bridge = false;
        for (const auto& s : sc_.vehicles) {
            auto v = std::make_unique<Vehicle>(sc_, s);
            bus_.advertise(v->prefix + "pose", MessageKind::pose);
            bus_.advertise(v->prefix + "twist", MessageKind::twist);
            bus_.advertise(v->prefix + "sensor", MessageKind::sensor);
            bus_.advertise(v->prefix + "command", MessageKind::command);
            bus_.advertise(v->prefix + "path", MessageKind::path);
            if (s.shield == ShieldKind::gr1) v->shield.emplace(*strategy_);
            if (s.model == ModelKind::bridge) {
                any_bridge = true;
                v->pose_sub = bus_.subscribe(v->prefix + "pose");
                v->twist_sub = bus_.subscribe(v->prefix + "twist");
            }
            v->odo.update(v->position());
            vehicles_.push_back(std::move(v));
        }
        for (const auto& p : sc_.pedestrians) {
            const Crossing* c = sc_.find_crossing(p.crossing);
            peds_.push_back(pedestrian_init(p, *c));
            ped_crossing_.push_back(static_cast<std::size_t>(c - sc_.crossings.data()));
        }
        if (any_bridge || opt_.bridge_port) {
            bridge_ = std::make_unique<BridgeServer>(bus_, opt_.bridge_port.value_or(0));
            if (opt_.on_bridge_ready) opt_.on_bridge_ready(bridge_->port());
            for (const auto& v : vehicles_) {
                if (v->spec->model != ModelKind::bridge) continue;
                if (!bridge_->wait_for_subscriber(v->prefix + "command", opt_.bridge_grace)) {
                    abort("bridge vehicle " + std::to_string(v->spec->id) + ": no client connected within " +
                          std::to_string(opt_.bridge_grace.count()) + " ms");
                }
            }
        }
        for (auto& v : vehicles_) {
            publish_state(*v);
            record_point(*v);
        }
        flush();
    }

    [[noreturn]] void abort(const std::string& why) {
        flush();
        throw RunAborted(why, bag_);
    }

    void flush() {
        auto msgs = bus_.drain(clock_.now());
        if (writer_) writer_->append(msgs);
        for (auto& m : msgs) bag_.messages.push_back(std::move(m));
    }

    void publish_state(Vehicle& v) {
        bus_.publish(v.prefix + "pose", PoseMsg{v.spec->id, v.state.x, v.state.y, v.state.theta});
        bus_.publish(v.prefix + "twist", TwistMsg{v.spec->id, v.state.v, v.omega});
    }

    void record_point(Vehicle& v) { v.metrics.trajectory.push_back({clock_.now(), v.state}); }

    void do_step(double dt, bool first) {
        const double t = clock_.now();
        std::vector<LightColor> colors;
        for (const auto& l : sc_.lights) colors.push_back(light_color(l.schedule, t));
        std::vector<Vec2> positions;
        std::vector<TrackedObject> tracked;
        for (const auto& v : vehicles_) {
            positions.push_back(v->position());
            tracked.push_back(v->tracked());
        }
        for (std::size_t i = 0; i < peds_.size(); ++i) {
            peds_[i] = pedestrian_step(peds_[i], sc_.pedestrians[i], sc_.crossings[ped_crossing_[i]], positions, dt);
        }
        for (std::size_t i = 0; i < sc_.lights.size(); ++i) {
            bus_.publish("/light", LightMsg{sc_.lights[i].id, colors[i], sc_.lights[i].position});
        }
        for (const auto& p : peds_) bus_.publish("/pedestrian", PedestrianMsg{p.id, p.velocity, p.position});

        const WorldView world{colors, peds_, ped_crossing_};
        const HazardConfig hcfg{sc_.hazard_horizon, sc_.yellow_is_red};
        for (auto& v : vehicles_) {
            v->hazard = hazard_query(v->route, v->odo.s(), world, hcfg);
            SensorMsg sensor{v->spec->id, {}, std::string(to_string(v->hazard.kind)), v->hazard.d};
            for (const auto& o : tracked) {
                if (o.id != v->spec->id) sensor.vehicles.push_back(o);
            }
            bus_.publish(v->prefix + "sensor", std::move(sensor));
            if (first) bus_.publish(v->prefix + "path", PathMsg{v->spec->id, v->route.path.points(), v->route.path.cyclic()});
            watch_lights(*v, colors, t);
        }
        prev_colors_.assign(colors.begin(), colors.end());

        std::vector<double> s_before, p_before;
        for (auto& v : vehicles_) {
            s_before.push_back(v->odo.s());
            p_before.push_back(v->odo.progress());
            drive(*v, tracked, dt);
        }
        clock_.advance(dt);
        if (bridge_) {
            try {
                bridge_->pump();
            } catch (const Error& e) {
                abort(std::string("bridge client sent an invalid message: ") + e.what());
            }
        }
        for (std::size_t i = 0; i < vehicles_.size(); ++i) {
            Vehicle& v = *vehicles_[i];
            if (v.spec->model == ModelKind::bridge) {
                read_bridge_state(v);
            } else {
                publish_state(v);
            }
            v.odo.update(v.position());
            count_crossings(v, colors, s_before[i], v.odo.progress() - p_before[i]);
            record_point(v);
        }
        update_clearances();
        if (bridge_) bridge_->tick(clock_.now());
        flush();
    }

    void watch_lights(Vehicle& v, const std::vector<LightColor>& colors, double t) {
        for (std::size_t k = 0; k < v.route.stops.size(); ++k) {
            const auto& stop = v.route.stops[k];
            const bool red = stops_traffic(colors[stop.light], sc_.yellow_is_red);
            const auto& prev = prev_colors_[stop.light];
            if (!red) {
                v.excused[k] = 0;
            } else if (!prev || !stops_traffic(*prev, sc_.yellow_is_red)) {
                const double d = v.route.path.forward_distance(v.odo.s(), stop.s);
                v.excused[k] = d <= v.state.v * sc_.commit_time;
            }
        }
        const bool urgent = v.hazard.kind == HazardKind::red_light && *v.hazard.d <= v.spec->filter.d_emr;
        if (!urgent) {
            v.urgent_since.reset();
        } else if (!v.urgent_since) {
            v.urgent_since = t;
        } else if (t - *v.urgent_since >= 2.0 && v.state.v >= 0.1) {
            ++v.metrics.compliance_failures;
        }
    }

    void count_crossings(Vehicle& v, const std::vector<LightColor>& colors, double s_before, double ds) {
        if (!(ds > 0.0)) return;
        for (std::size_t k = 0; k < v.route.stops.size(); ++k) {
            const auto& stop = v.route.stops[k];
            if (!v.route.path.cyclic() && stop.s < s_before) continue;
            const double d = v.route.path.forward_distance(s_before, stop.s);
            if (d > 0.0 && d <= ds && stops_traffic(colors[stop.light], sc_.yellow_is_red) && !v.excused[k]) {
                ++v.metrics.red_light_violations;
            }
        }
    }

    void drive(Vehicle& v, const std::vector<TrackedObject>& tracked, double dt) {
        const auto out = v.manager.step(v.state, tracked);
        const auto& f = v.spec->filter;
        double u = 0.0;
        std::string drive_state;
        if (v.shield) {
            const auto dec = v.shield->step(safety::flags_from_distance(v.hazard.d, f));
            if (dec.assumption_violated) ++v.metrics.assumption_violations;
            u = safety::apply_drive_state(dec.state, out.v_cmd, v.hazard.d, f);
            drive_state = std::string(safety::to_string(dec.state));
        } else {
            u = safety::rule_filter(out.v_cmd, v.hazard.d, f);
        }
        bus_.publish(v.prefix + "command", CommandMsg{v.spec->id, out.delta, u, out.v_cmd, dt, drive_state});
        const auto& params = v.spec->params;
        switch (v.spec->model) {
            case ModelKind::kinematic: {
                const auto pd = dynamics::pd_accel(u, v.state.v, v.pd, dt, params);
                v.omega = dynamics::heading_increment(v.state.v, out.delta, dt, params.wheelbase) / dt;
                v.state = dynamics::kinematic_step(v.state, out.delta, pd.accel, dt, params);
                v.pd = pd.memory;
                break;
            }
            case ModelKind::twin: {
                v.omega = dynamics::heading_increment(v.state.v, out.delta, dt, params.wheelbase) / dt;
                auto r = twin::twin_step(*v.spec->network, *v.window, v.state, out.delta, u, dt, params);
                v.state = r.state;
                v.window = std::move(r.window);
                break;
            }
            case ModelKind::bridge: {
                const std::string topic = v.prefix + "twist";
                const bool ok = bridge_->wait_for_inbound([&](const InboundMessage& m) { return m.topic == topic; },
                                                          opt_.bridge_timeout);
                if (!ok) {
                    std::string why = "bridge vehicle " + std::to_string(v.spec->id) + ": no reply at t=" +
                                      std::to_string(clock_.now()) + " s";
                    why += bridge_->open_sessions() == 0 ? " (client disconnected)" : " (timed out)";
                    abort(why);
                }
                break;
            }
        }
    }

    void read_bridge_state(Vehicle& v) {
        auto poses = bus_.take(v.pose_sub);
        auto twists = bus_.take(v.twist_sub);
        if (poses.empty() || twists.empty()) {
            abort("bridge vehicle " + std::to_string(v.spec->id) + ": reply lacks pose or twist");
        }
        const auto& pose = std::get<PoseMsg>(poses.back().payload);
        const auto& twist = std::get<TwistMsg>(twists.back().payload);
        v.state = {pose.x, pose.y, pose.theta, twist.v};
        v.omega = twist.omega;
    }

    void update_clearances() {
        for (std::size_t i = 0; i < vehicles_.size(); ++i) {
            for (std::size_t j = i + 1; j < vehicles_.size(); ++j) {
                metrics_.min_vehicle_clearance = std::min(
                    metrics_.min_vehicle_clearance, distance(vehicles_[i]->position(), vehicles_[j]->position()));
            }
            for (const auto& p : peds_) {
                if (p.phase != PedPhase::walking) continue;
                metrics_.min_pedestrian_clearance =
                    std::min(metrics_.min_pedestrian_clearance, distance(vehicles_[i]->position(), p.position));
            }
        }
    }

    const Scenario& sc_;
    const EngineOptions& opt_;
    SimClock clock_;
    MessageBus bus_;
    Bag bag_;
    std::optional<BagWriter> writer_;
    std::optional<safety::Strategy> strategy_;
    std::vector<std::unique_ptr<Vehicle>> vehicles_;
    std::vector<PedestrianState> peds_;
    std::vector<std::size_t> ped_crossing_;
    std::vector<std::optional<LightColor>> prev_colors_;
    std::unique_ptr<BridgeServer> bridge_;
    RunMetrics metrics_;
};

nlohmann::json finite_or_null(double x) {
    return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr);
}

}  // namespace

RunResult engine_run(const Scenario& scenario, const EngineOptions& options) {
    return Engine(scenario, options).run();
}

nlohmann::json metrics_to_json(const RunMetrics& m) {
    nlohmann::json j{{"steps", m.steps},
                     {"duration", m.duration},
                     {"red_light_violations", m.red_light_violations},
                     {"compliance_failures", m.compliance_failures},
                     {"min_pedestrian_clearance", finite_or_null(m.min_pedestrian_clearance)},
                     {"min_vehicle_clearance", finite_or_null(m.min_vehicle_clearance)}};
    j["vehicles"] = nlohmann::json::array();
    for (const auto& v : m.vehicles) {
        j["vehicles"].push_back({{"id", v.id},
                                 {"laps", v.laps},
                                 {"distance", v.distance},
                                 {"red_light_violations", v.red_light_violations},
                                 {"compliance_failures", v.compliance_failures},
                                 {"assumption_violations", v.assumption_violations}});
    }
    return j;
}

}  // namespace viltwin::sim
