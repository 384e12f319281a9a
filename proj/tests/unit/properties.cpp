// Randomized checks of the library invariants. Every generator is seeded so
// failures reproduce.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>

#include "viltwin/control/acc.hpp"
#include "viltwin/control/manager.hpp"
#include "viltwin/control/pure_pursuit.hpp"
#include "viltwin/core/bag.hpp"
#include "viltwin/core/bus.hpp"
#include "viltwin/core/rng.hpp"
#include "viltwin/core/sampling.hpp"
#include "viltwin/dynamics/kinematic.hpp"
#include "viltwin/safety/gr1_solver.hpp"
#include "viltwin/safety/gr1_spec.hpp"
#include "viltwin/safety/rule_filter.hpp"
#include "viltwin/sim/hazard.hpp"
#include "viltwin/sim/lights.hpp"
#include "viltwin/sim/pedestrians.hpp"
#include "viltwin/sim/scenario.hpp"
#include "viltwin/twin/network.hpp"

using namespace viltwin;

namespace {

const std::filesystem::path kData = VILTWIN_DATA_DIR;

Payload random_payload(Xoshiro256& rng, int id) {
    auto num = [&] { return rng.uniform(-1e3, 1e3); };
    switch (rng() % 7) {
        case 0: return PoseMsg{id, num(), num(), num()};
        case 1: return TwistMsg{id, rng.uniform(0, 4), num()};
        case 2: {
            PathMsg p{id, {}, rng() % 2 == 0};
            for (int i = 0, n = 2 + static_cast<int>(rng() % 5); i < n; ++i) p.points.push_back({num(), num()});
            return p;
        }
        case 3: {
            SensorMsg s{id, {}, "none", std::nullopt};
            for (int i = 0, n = static_cast<int>(rng() % 3); i < n; ++i) {
                s.vehicles.push_back({i, num(), num(), num(), rng.uniform(0, 4)});
            }
            if (rng() % 2) {
                s.hazard = rng() % 2 ? "red_light" : "pedestrian";
                s.hazard_d = rng.uniform(0, 30);
            }
            return s;
        }
        case 4: return LightMsg{id, static_cast<LightColor>(rng() % 3), {num(), num()}};
        case 5: return PedestrianMsg{id, {num(), num()}, {num(), num()}};
        default: return CommandMsg{id, rng.uniform(-0.4, 0.4), rng.uniform(0, 4), rng.uniform(0, 4), 0.02, "DCL"};
    }
}

/// Gerono lemniscate, a figure eight that crosses itself at the origin.
control::WaypointPath figure_eight(double a, int n) {
    std::vector<Vec2> pts;
    for (int i = 0; i < n; ++i) {
        const double t = 2.0 * std::numbers::pi * i / n;
        pts.push_back({a * std::sin(t), a * std::sin(t) * std::cos(t)});
    }
    return control::WaypointPath(pts, true);
}

}  // namespace

TEST_CASE("bus keeps per-topic order for every subscriber") {
    Xoshiro256 rng(101);
    for (int round = 0; round < 50; ++round) {
        SimClock clock;
        MessageBus bus(clock);
        const std::vector<std::string> topics{"/a", "/b", "/c"};
        std::map<std::string, std::vector<SubscriberId>> subs;
        for (const auto& t : topics) {
            bus.advertise(t, MessageKind::twist);
            for (int k = 0, n = static_cast<int>(rng() % 3); k < n; ++k) subs[t].push_back(bus.subscribe(t));
        }
        std::map<std::string, std::vector<int>> sent;
        std::map<SubscriberId, std::vector<int>> got;
        for (int i = 0; i < 300; ++i) {
            const auto& t = topics[rng() % topics.size()];
            bus.publish(t, TwistMsg{i, 0.0, 0.0});
            sent[t].push_back(i);
            if (rng() % 4 == 0) clock.advance(rng.uniform(0.0, 0.05));
            if (rng() % 10 == 0) {
                for (const auto& [topic, ids] : subs) {
                    for (auto id : ids) {
                        for (const auto& m : bus.take(id)) got[id].push_back(std::get<TwistMsg>(m.payload).id);
                    }
                }
            }
        }
        for (const auto& [topic, ids] : subs) {
            for (auto id : ids) {
                for (const auto& m : bus.take(id)) got[id].push_back(std::get<TwistMsg>(m.payload).id);
                CHECK(got[id] == sent[topic]);
            }
        }
        const auto all = bus.drain(clock.now());
        CHECK(all.size() == 300);
        CHECK(std::is_sorted(all.begin(), all.end(), [](const Message& a, const Message& b) { return a.t < b.t; }));
    }
}

TEST_CASE("sampling intervals look stationary") {
    for (std::uint64_t seed : {1ULL, 7ULL, 42ULL, 12345ULL}) {
        SamplingProcess p({0.02, 0.2, seed});
        std::vector<double> means;
        for (int w = 0; w < 10; ++w) {
            double sum = 0.0;
            for (int i = 0; i < 1000; ++i) {
                const double dt = p.sample();
                REQUIRE(dt >= 0.02 * 0.8);
                REQUIRE(dt <= 0.02 * 1.2);
                sum += dt;
            }
            means.push_back(sum / 1000.0);
        }
        const auto [lo, hi] = std::minmax_element(means.begin(), means.end());
        CHECK(*hi - *lo < 0.05 * 0.02);
    }
}

TEST_CASE("bags round-trip arbitrary traffic") {
    Xoshiro256 rng(202);
    const auto path = std::filesystem::temp_directory_path() / "viltwin_prop.bag";
    for (int round = 0; round < 20; ++round) {
        Bag bag;
        bag.metadata.seed = rng();
        bag.metadata.scenario = "random " + std::to_string(round);
        double t = 0.0;
        for (int i = 0, n = static_cast<int>(rng() % 200); i < n; ++i) {
            if (rng() % 3 == 0) t += rng.uniform(0.0, 0.1);
            bag.messages.push_back({t, "/topic/" + std::to_string(rng() % 5), random_payload(rng, i)});
        }
        bag_write(bag, path);
        CHECK(bag_read(path) == bag);
    }
    std::filesystem::remove(path);
}

TEST_CASE("heading increment is exact") {
    Xoshiro256 rng(303);
    dynamics::KinematicParams p;
    for (int i = 0; i < 20000; ++i) {
        const dynamics::VehicleState s{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-10, 10),
                                       rng.uniform(0, 4)};
        const double delta = rng.uniform(-p.delta_max, p.delta_max);
        const double dt = rng.uniform(0.001, 0.05);
        const auto n = dynamics::kinematic_step(s, delta, rng.uniform(-5, 5), dt, p);
        REQUIRE(n.theta == s.theta + dt / p.wheelbase * s.v * std::tan(delta));
    }
}

TEST_CASE("constant steering traces a circle") {
    dynamics::KinematicParams p;
    for (double delta : {0.1, 0.25, 0.4}) {
        const double v = 1.5;
        const double R = p.wheelbase / std::tan(delta);
        const double dt = 0.01 * R / v;
        const Vec2 centre{0.0, R};
        dynamics::VehicleState s{0, 0, 0, v};
        double worst = 0.0;
        const int steps = static_cast<int>(std::ceil(2 * std::numbers::pi * R / (v * dt)));
        for (int i = 0; i < steps; ++i) {
            s = dynamics::kinematic_step(s, delta, 0.0, dt, p);
            worst = std::max(worst, std::abs(distance({s.x, s.y}, centre) - R));
        }
        CHECK(worst < 0.05 * R);
    }
}

TEST_CASE("speed stays inside its clamp") {
    Xoshiro256 rng(404);
    dynamics::KinematicParams p;
    dynamics::PlantParams pp;
    dynamics::VehicleState a{}, b{};
    for (int i = 0; i < 20000; ++i) {
        const double dt = rng.uniform(0.001, 0.2);
        a = dynamics::kinematic_step(a, 0.0, rng.uniform(-100, 100), dt, p);
        b = dynamics::synth_plant_step(b, 0.0, rng.uniform(-10, 10), dt, pp);
        REQUIRE(a.v >= 0.0);
        REQUIRE(a.v <= p.v_max);
        REQUIRE(b.v >= 0.0);
        REQUIRE(b.v <= pp.kinematic.v_max);
    }
}

TEST_CASE("normalizer inverts") {
    Xoshiro256 rng(505);
    for (int round = 0; round < 100; ++round) {
        twin::Normalizer n{{rng.uniform(-5, 5), rng.uniform(-5, 5)}, {rng.uniform(0.01, 10), rng.uniform(0.01, 10)}};
        for (int i = 0; i < 100; ++i) {
            const int c = i % 2;
            const double x = rng.uniform(-100, 100);
            const double back = n.denormalize(c, n.normalize(c, x));
            REQUIRE(std::abs(back - x) <= 1e-12 * std::max(1.0, std::abs(x)));
        }
    }
}

TEST_CASE("network shape law") {
    Xoshiro256 rng(606);
    for (int round = 0; round < 30; ++round) {
        const twin::NetworkShape shape{1 + static_cast<int>(rng() % 8), 1 + static_cast<int>(rng() % 6),
                                       1 + static_cast<int>(rng() % 6), 1 + static_cast<int>(rng() % 6)};
        const auto net = twin::TwinNetwork::random(shape, rng());
        auto w = twin::HistoryWindow::zeros(shape.window);
        for (int t = 0; t < shape.window; ++t) {
            w.u[t] = rng.uniform(0, 4);
            w.v[t] = rng.uniform(0, 4);
        }
        const double y = twin::forward(net, w);
        CHECK(std::isfinite(y));
        CHECK(twin::forward(net, w) == y);
        CHECK_THROWS_AS(twin::forward(net, twin::HistoryWindow::zeros(shape.window + 1)), ValidationError);
        if (shape.window > 1) {
            CHECK_THROWS_AS(twin::forward(net, twin::HistoryWindow::zeros(shape.window - 1)), ValidationError);
        }
    }
}

TEST_CASE("acc speed is monotone and continuous") {
    for (const control::AccConfig cfg : {control::AccConfig{}, control::AccConfig{2.0, 0.8, 4.0}}) {
        double prev = 0.0;
        for (int i = 0; i <= 5000; ++i) {
            const double d = i * 0.01;
            const double v = control::acc_speed(d, cfg);
            REQUIRE(v >= prev);
            REQUIRE(v - prev <= 0.01 / cfg.t_safe + 1e-12);
            REQUIRE(v <= cfg.v_nom);
            prev = v;
        }
        CHECK(control::acc_speed(cfg.d_min, cfg) == 0.0);
        CHECK(control::acc_speed(cfg.d_min + cfg.v_nom * cfg.t_safe, cfg) == doctest::Approx(cfg.v_nom));
    }
}

TEST_CASE("pure pursuit steers toward the target") {
    Xoshiro256 rng(707);
    control::PpConfig cfg;
    for (int i = 0; i < 20000; ++i) {
        const dynamics::VehicleState pose{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-4, 4), 1.0};
        const double bearing = rng.uniform(-std::numbers::pi, std::numbers::pi);
        const double r = rng.uniform(0.5, 5);
        const Vec2 target{pose.x + r * std::cos(pose.theta + bearing), pose.y + r * std::sin(pose.theta + bearing)};
        const double delta = control::pure_pursuit(pose, target, cfg);
        REQUIRE(std::abs(delta) <= cfg.delta_max);
        if (std::abs(std::sin(bearing)) > 1e-9) REQUIRE(std::signbit(delta) == std::signbit(std::sin(bearing)));
    }
    CHECK(control::pure_pursuit({0, 0, 0.7, 0}, {std::cos(0.7) * 2, std::sin(0.7) * 2}, cfg) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("steering ignores leaders") {
    Xoshiro256 rng(808);
    const control::WaypointPath path({{0, 0}, {20, 0}, {20, 20}, {0, 20}}, true);
    for (int i = 0; i < 200; ++i) {
        const double s = rng.uniform(0, 80);
        const Vec2 p = path.point_at(s);
        const dynamics::VehicleState pose{p.x + rng.uniform(-0.5, 0.5), p.y + rng.uniform(-0.5, 0.5),
                                          path.heading_at(s), 1.0};
        control::ControllerManager alone(1, path, {});
        control::ControllerManager crowded(1, path, {});
        const Vec2 q = path.point_at(path.wrap(s + rng.uniform(1, 20)));
        const auto a = alone.step(pose, {});
        const auto b = crowded.step(pose, {{2, q.x, q.y, 0, 0}});
        REQUIRE(a.delta == b.delta);
        REQUIRE(b.v_cmd <= a.v_cmd);
    }
}

TEST_CASE("closed loop stays on a figure eight") {
    const auto path = figure_eight(12.0, 400);
    control::ManagerConfig cfg;
    cfg.acc.v_nom = 2.0;
    control::ControllerManager mgr(1, path, cfg);
    dynamics::KinematicParams kp;
    SamplingProcess proc({0.02, 0.2, 5});
    dynamics::VehicleState s{0, 0, path.heading_at(0), 0};
    dynamics::PdMemory mem{0, 0};
    double worst = 0.0;
    int guard = 0;
    while (mgr.tracker().progress() < path.length() && guard++ < 200000) {
        const auto out = mgr.step(s, {});
        const double dt = proc.sample();
        const auto pd = dynamics::pd_accel(out.v_cmd, s.v, mem, dt, kp);
        mem = pd.memory;
        s = dynamics::kinematic_step(s, out.delta, pd.accel, dt, kp);
        worst = std::max(worst, path.project({s.x, s.y}).distance);
    }
    CHECK(mgr.tracker().progress() >= path.length());
    CHECK(worst < 0.5);
}

TEST_CASE("rule filter bands, monotone and continuous") {
    safety::FilterConfig cfg;
    for (double v_cmd : {0.5, 2.0, 4.0}) {
        double prev = -1.0;
        for (int i = 0; i <= 3000; ++i) {
            const double d = i / 100.0;
            const double u = safety::rule_filter(v_cmd, d, cfg);
            const auto flags = safety::flags_from_distance(d, cfg);
            REQUIRE_FALSE((flags.urg && flags.wrn));
            if (d <= cfg.d_emr) REQUIRE(u == 0.0);
            else if (d <= cfg.d_det) REQUIRE((u > 0.0 && u <= v_cmd));
            else REQUIRE(u == v_cmd);
            REQUIRE(u >= prev);
            if (prev >= 0.0) REQUIRE(u - prev <= v_cmd * 0.01 / (cfg.d_det - cfg.d_emr) + 1e-12);
            prev = u;
        }
    }
}

TEST_CASE("shield is sound on every short input word") {
    const auto solved = safety::solve_gr1(safety::build_paper_spec());
    REQUIRE(solved.strategy);
    const auto& st = *solved.strategy;
    const auto& c = st.compiled();
    const auto enc = safety::DriveEncoding::of(st.spec());
    const safety::EnvFlags letters[3] = {{false, false}, {false, true}, {true, false}};
    std::size_t words = 0;
    std::function<void(const safety::DriveShield&, std::uint32_t, std::uint32_t, int)> walk =
        [&](const safety::DriveShield& sh, std::uint32_t, std::uint32_t sys, int depth) {
            if (depth == 10) {
                ++words;
                return;
            }
            for (const auto& f : letters) {
                auto next = sh;
                const auto d = next.step(f);
                REQUIRE_FALSE(d.assumption_violated);
                const auto e2 = enc.env(f);
                const auto s2 = enc.sys(d.state);
                // The output answers the input just read, so it is checked against (input, previous output).
                if (depth == 0) REQUIRE(c.sys_init(e2, sys));
                REQUIRE(c.sys_trans(e2, sys, 0, s2));
                REQUIRE_FALSE((enc.state(sys) == safety::DriveState::STP && d.state == safety::DriveState::DCL));
                walk(next, e2, s2, depth + 1);
            }
        };
    walk(safety::DriveShield(st), 0, enc.sys(safety::DriveState::MOV), 0);
    CHECK(words == 59049);
}

TEST_CASE("hazards are never behind the vehicle") {
    const auto sc = sim::load_scenario(kData / "benchmark.scn");
    Xoshiro256 rng(909);
    sim::HazardConfig cfg{sc.hazard_horizon, false};
    for (const auto& v : sc.vehicles) {
        const auto route = sim::build_route(sc, v);
        for (int i = 0; i < 5000; ++i) {
            sim::WorldView w;
            for (std::size_t l = 0; l < sc.lights.size(); ++l) w.lights.push_back(static_cast<LightColor>(rng() % 3));
            for (const auto& ps : sc.pedestrians) {
                const auto* crossing = sc.find_crossing(ps.crossing);
                auto ped = sim::pedestrian_init(ps, *crossing);
                ped.phase = static_cast<sim::PedPhase>(rng() % 3);
                w.pedestrians.push_back(ped);
                w.ped_crossing.push_back(static_cast<std::size_t>(crossing - sc.crossings.data()));
            }
            const auto q = sim::hazard_query(route, rng.uniform(0, route.path.length()), w, cfg);
            if (q.kind == sim::HazardKind::none) {
                REQUIRE_FALSE(q.d);
            } else {
                REQUIRE(q.d);
                REQUIRE(*q.d >= 0.0);
                REQUIRE(*q.d <= cfg.horizon);
            }
        }
    }
}

TEST_CASE("pedestrians stay on their crossing") {
    Xoshiro256 rng(1010);
    const sim::Crossing c{0, {-3, 1}, {4, 6}, 20};
    sim::PedestrianSpec spec;
    spec.home = c.b;
    auto ped = sim::pedestrian_init(spec, c);
    std::vector<Vec2> cars(2);
    for (int i = 0; i < 20000; ++i) {
        for (auto& car : cars) car = {rng.uniform(-40, 40), rng.uniform(-40, 40)};
        ped = sim::pedestrian_step(ped, spec, c, cars, rng.uniform(0.016, 0.024));
        REQUIRE(point_segment_distance(c.a, c.b, ped.position) < 1e-9);
        REQUIRE(ped.velocity.norm() <= spec.walk_speed + 1e-12);
    }
    CHECK(ped.crossings > 0);
}

TEST_CASE("light phases cycle in order") {
    Xoshiro256 rng(1111);
    for (int round = 0; round < 20; ++round) {
        sim::LightSchedule s{static_cast<LightColor>(rng() % 3), rng.uniform(0.5, 5), rng.uniform(0.5, 5),
                             rng.uniform(0.5, 5)};
        auto follows = [](LightColor a) {
            if (a == LightColor::red) return LightColor::yellow;
            if (a == LightColor::yellow) return LightColor::green;
            return LightColor::red;
        };
        LightColor prev = sim::light_color(s, 0.0);
        CHECK(prev == s.initial);
        int changes = 0;
        for (int i = 1; i <= 5000; ++i) {
            const LightColor c = sim::light_color(s, i * 0.01);
            if (c != prev) {
                REQUIRE(c == follows(prev));
                ++changes;
            }
            prev = c;
        }
        CHECK(changes >= static_cast<int>(50.0 / s.period()) * 3 - 1);
    }
}
