#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "viltwin/core/error.hpp"
#include "viltwin/sim/compare.hpp"
#include "viltwin/sim/engine.hpp"
#include "viltwin/sim/hazard.hpp"
#include "viltwin/sim/lights.hpp"
#include "viltwin/sim/pedestrians.hpp"
#include "viltwin/sim/scenario.hpp"
#include "viltwin/sim/track_shapes.hpp"

using namespace viltwin;
using namespace viltwin::sim;
using nlohmann::json;

namespace {

const std::filesystem::path kData = VILTWIN_DATA_DIR;

json benchmark_json() {
    std::ifstream in(kData / "benchmark.scn");
    return json::parse(in);
}

// Straight road along +x with one light stopping at x = 12 and one crossing at x = 8.
Scenario strip() {
    Scenario sc;
    sc.tracks.push_back({"road", control::WaypointPath({{0, 0}, {50, 0}}, false)});
    sc.crossings.push_back({0, {8, -2}, {8, 2}, 20});
    Light l;
    l.id = 1;
    l.position = {12, 1};
    l.stop_lines.push_back({"road", 12.0});
    sc.lights.push_back(l);
    PedestrianSpec p;
    p.id = 1;
    p.home = {8, -2};
    p.crossing = 0;
    sc.pedestrians.push_back(p);
    VehicleSpec v;
    v.id = 1;
    v.track = "road";
    sc.vehicles.push_back(v);
    return sc;
}

WorldView world_of(const Scenario& sc, LightColor color, PedPhase phase) {
    WorldView w;
    w.lights = {color};
    auto ped = pedestrian_init(sc.pedestrians[0], sc.crossings[0]);
    ped.phase = phase;
    w.pedestrians = {ped};
    w.ped_crossing = {0};
    return w;
}

dynamics::Trajectory line(double v, double dt, int n, double x0 = 0.0) {
    dynamics::Trajectory tr;
    for (int k = 0; k < n; ++k) tr.push_back({k * dt, {x0 + v * k * dt, 0.0, 0.0, v}});
    return tr;
}

}  // namespace

TEST_CASE("benchmark scenario") {
    const auto sc = load_scenario(kData / "benchmark.scn");
    CHECK(sc.tracks.size() == 2);
    CHECK(sc.crossings.size() == 5);
    CHECK(sc.lights.size() == 2);
    CHECK(sc.pedestrians.size() == 2);
    CHECK(sc.vehicles.size() == 2);
    CHECK(sc.name == "benchmark");
}

TEST_CASE("scenario errors") {
    SUBCASE("dangling crossing") {
        auto doc = benchmark_json();
        doc["pedestrians"][0]["crossing"] = 9;
        try {
            parse_scenario(doc, kData);
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            const std::string msg = e.what();
            CHECK(msg.find("pedestrians[0].crossing") != std::string::npos);
            CHECK(msg.find("9") != std::string::npos);
        }
    }
    SUBCASE("unknown key") {
        auto doc = benchmark_json();
        doc["vehicles"][0]["colour"] = "red";
        CHECK_THROWS_AS(parse_scenario(doc, kData), ValidationError);
    }
    SUBCASE("stop line off the track") {
        auto doc = benchmark_json();
        doc["lights"][0]["stop_lines"][0]["at"] = json::array({0, 0});
        CHECK_THROWS_AS(parse_scenario(doc, kData), ValidationError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_scenario(kData / "no_such.scn"), ValidationError);
    }
    SUBCASE("minimal map and track") {
        const json doc = {{"version", 1},
                          {"map", {{"width", 20}, {"height", 20}}},
                          {"tracks", json::array({{{"name", "loop"},
                                                   {"points", json::array({json::array({0, 0}), json::array({5, 0}),
                                                                           json::array({5, 5})})},
                                                   {"cyclic", true}}})}};
        const auto sc = parse_scenario(doc, ".");
        CHECK(sc.tracks.size() == 1);
        CHECK(sc.lights.empty());
        CHECK(sc.pedestrians.empty());
        CHECK(sc.vehicles.empty());
    }
}

TEST_CASE("track shapes") {
    RoundedRect r;
    r.width = 20;
    r.height = 10;
    r.radius = 2;
    const auto pts = rounded_rect(r);
    const control::WaypointPath path(pts, true);
    const double exact = 2 * (20 - 4) + 2 * (10 - 4) + 2 * std::numbers::pi * 2;
    CHECK(rounded_rect_length(r) == doctest::Approx(exact));
    CHECK(path.length() == doctest::Approx(exact).epsilon(0.01));
    CHECK(pts.front().x == doctest::Approx(0.0));
    CHECK(pts.front().y == doctest::Approx(-5.0));
    r.radius = 6;
    CHECK_THROWS_AS(r.validate(), ValidationError);
}

TEST_CASE("light schedule") {
    LightSchedule s;
    CHECK(light_color(s, 3.0) == LightColor::red);
    CHECK(light_color(s, 6.0) == LightColor::yellow);
    CHECK(light_color(s, 8.0) == LightColor::green);
    CHECK(light_color(s, 17.0) == LightColor::red);
    CHECK(light_color(s, 34.5) == LightColor::red);
    s.initial = LightColor::green;
    CHECK(light_color(s, 0.0) == LightColor::green);
    CHECK(light_color(s, 10.5) == LightColor::red);
    CHECK_THROWS_AS(light_color(s, -1.0), ValidationError);
    s.red = 0.0;
    CHECK_THROWS_AS(s.validate(), ValidationError);
}

TEST_CASE("pedestrian") {
    const Crossing c{0, {0, 0}, {0, 7}, 20};
    PedestrianSpec spec;
    spec.home = {0, 0};
    const auto p0 = pedestrian_init(spec, c);
    CHECK(p0.position == Vec2{0, 0});
    CHECK(p0.phase == PedPhase::idle);
    SUBCASE("no vehicle near") {
        const std::vector<Vec2> far{{100, 0}};
        const auto p = pedestrian_step(p0, spec, c, far, 0.02);
        CHECK(p.position == p0.position);
        CHECK(p.phase == PedPhase::idle);
    }
    SUBCASE("vehicle enters the radius") {
        const std::vector<Vec2> near{{15, 3.5}};
        const auto p = pedestrian_step(p0, spec, c, near, 0.02);
        CHECK(p.phase == PedPhase::walking);
        CHECK(p.position.y == doctest::Approx(spec.walk_speed * 0.02));
        CHECK(p.velocity.y == doctest::Approx(spec.walk_speed));
    }
    SUBCASE("waits while a vehicle is close") {
        const std::vector<Vec2> close{{3, 3.5}};
        const auto p = pedestrian_step(p0, spec, c, close, 0.02);
        CHECK(p.phase == PedPhase::waiting);
        CHECK(p.position == p0.position);
    }
    SUBCASE("traversal time") {
        const std::vector<Vec2> near{{15, 3.5}};
        auto p = p0;
        int steps = 0;
        while (p.crossings == 0 && steps < 1000) {
            p = pedestrian_step(p, spec, c, near, 0.02);
            ++steps;
        }
        CHECK(steps == static_cast<int>(std::ceil(7.0 / (spec.walk_speed * 0.02))));
        CHECK(p.position == c.b);
        CHECK_FALSE(p.at_a);
        CHECK(p.phase == PedPhase::idle);
        // still inside the radius, so no new trigger
        p = pedestrian_step(p, spec, c, near, 0.02);
        CHECK(p.phase == PedPhase::idle);
    }
}

TEST_CASE("hazard query") {
    const auto sc = strip();
    const auto route = build_route(sc, sc.vehicles[0]);
    REQUIRE(route.stops.size() == 1);
    REQUIRE(route.crossings.size() == 1);
    CHECK(route.crossings[0].s == doctest::Approx(8.0));
    HazardConfig cfg;
    SUBCASE("red light ahead") {
        const auto q = hazard_query(route, 0.0, world_of(sc, LightColor::red, PedPhase::idle), cfg);
        CHECK(q.kind == HazardKind::red_light);
        CHECK(*q.d == doctest::Approx(12.0));
    }
    SUBCASE("green light") {
        const auto q = hazard_query(route, 0.0, world_of(sc, LightColor::green, PedPhase::idle), cfg);
        CHECK(q.kind == HazardKind::none);
        CHECK_FALSE(q.d);
    }
    SUBCASE("yellow counts only when configured") {
        CHECK(hazard_query(route, 0.0, world_of(sc, LightColor::yellow, PedPhase::idle), cfg).kind ==
              HazardKind::none);
        cfg.yellow_is_red = true;
        CHECK(hazard_query(route, 0.0, world_of(sc, LightColor::yellow, PedPhase::idle), cfg).kind ==
              HazardKind::red_light);
    }
    SUBCASE("pedestrian nearer than the light") {
        const auto q = hazard_query(route, 0.0, world_of(sc, LightColor::red, PedPhase::walking), cfg);
        CHECK(q.kind == HazardKind::pedestrian);
        CHECK(*q.d == doctest::Approx(8.0));
    }
    SUBCASE("behind the vehicle") {
        CHECK(hazard_query(route, 13.0, world_of(sc, LightColor::red, PedPhase::walking), cfg).kind ==
              HazardKind::none);
    }
    SUBCASE("beyond the horizon") {
        cfg.horizon = 10.0;
        CHECK(hazard_query(route, 0.0, world_of(sc, LightColor::red, PedPhase::idle), cfg).kind == HazardKind::none);
    }
}

TEST_CASE("reverse route") {
    const auto sc = load_scenario(kData / "benchmark.scn");
    auto v = sc.vehicles[0];
    const auto fwd = build_route(sc, v);
    v.direction = Direction::reverse;
    const auto rev = build_route(sc, v);
    CHECK(rev.path.points().front() == fwd.path.points().front());
    CHECK(rev.path.length() == doctest::Approx(fwd.path.length()));
    REQUIRE(rev.stops.size() == fwd.stops.size());
    CHECK(rev.stops[0].s == doctest::Approx(fwd.path.length() - fwd.stops[0].s));
    CHECK(rev.crossings.size() == fwd.crossings.size());
}

TEST_CASE("compare") {
    SUBCASE("identity") {
        const auto a = line(1.0, 0.1, 101);
        const auto e = compare_trajectories(a, a);
        CHECK(e.position_rmse == 0.0);
        CHECK(e.velocity_mse == 0.0);
    }
    SUBCASE("one vs two metres per second") {
        const auto e = compare_trajectories(line(1.0, 0.1, 101), line(2.0, 0.1, 101));
        CHECK(e.velocity_mse == doctest::Approx(1.0));
    }
    SUBCASE("shifted by one sample") {
        // b is a delayed by one 0.1 s sample, so on a 1 m/s line the gap is 0.1 m throughout.
        const auto a = line(1.0, 0.1, 101);
        const auto b = line(1.0, 0.1, 101, 0.1);
        const auto e = compare_trajectories(a, b);
        CHECK(e.position_rmse == doctest::Approx(0.1));
        CHECK(e.velocity_mse == doctest::Approx(0.0));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(compare_trajectories({}, line(1, 0.1, 3)), ValidationError);
        dynamics::Trajectory late;
        for (int k = 0; k < 3; ++k) late.push_back({100.0 + k, {}});
        CHECK_THROWS_AS(compare_trajectories(line(1, 0.1, 3), late), ValidationError);
        CHECK_THROWS_AS(compare_trajectories(line(1, 0.1, 3), line(1, 0.1, 3), 0.0), ValidationError);
    }
}

TEST_CASE("engine") {
    SUBCASE("empty scenario") {
        Scenario sc;
        sc.tracks.push_back({"loop", control::WaypointPath({{0, 0}, {5, 0}, {5, 5}}, true)});
        EngineOptions opt;
        opt.duration = 1.0;
        const auto r = engine_run(sc, opt);
        CHECK(r.bag.messages.empty());
        CHECK(r.metrics.red_light_violations == 0);
        CHECK(r.metrics.compliance_failures == 0);
        CHECK(r.metrics.vehicles.empty());
        CHECK(r.metrics.steps > 0);
    }
    const auto sc = load_scenario(kData / "benchmark.scn");
    EngineOptions opt;
    opt.duration = 8.0;
    opt.seed = 42;
    const auto a = engine_run(sc, opt);
    SUBCASE("repeatable") {
        const auto b = engine_run(sc, opt);
        CHECK(bag_to_string(a.bag) == bag_to_string(b.bag));
        opt.seed = 43;
        CHECK(bag_to_string(engine_run(sc, opt).bag) != bag_to_string(a.bag));
    }
    SUBCASE("bag compared with itself") {
        const auto e = compare_models(a.bag, a.bag, 1);
        CHECK(e.position_rmse == 0.0);
        CHECK(e.velocity_mse == 0.0);
        CHECK(e.samples > 0);
    }
    SUBCASE("replay csv holds every pose") {
        std::ostringstream out;
        write_trace_csv(out, a.bag);
        std::size_t rows = 0;
        std::istringstream in(out.str());
        std::string line_text;
        std::getline(in, line_text);
        CHECK(line_text == "t,id,x,y,theta,v");
        while (std::getline(in, line_text)) ++rows;
        std::size_t poses = 0;
        for (const auto& m : a.bag.messages) poses += m.kind() == MessageKind::pose;
        CHECK(rows == poses);
        CHECK(poses > 0);
    }
    SUBCASE("vehicles start on their routes") {
        for (const auto& v : sc.vehicles) {
            const auto route = build_route(sc, v);
            const auto s0 = initial_state(sc, v);
            CHECK(route.path.project({s0.x, s0.y}).distance < 1e-9);
        }
    }
}
