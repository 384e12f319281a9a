#include "viltwin/sim/scenario.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "viltwin/core/error.hpp"
#include "viltwin/sim/track_shapes.hpp"
#include "viltwin/twin/weights_io.hpp"

namespace viltwin::sim {

using nlohmann::json;

std::string_view to_string(ModelKind k) noexcept {
    switch (k) {
        case ModelKind::kinematic:
            return "kinematic";
        case ModelKind::twin:
            return "twin";
        case ModelKind::bridge:
            return "bridge";
    }
    return "?";
}

std::string_view to_string(ShieldKind k) noexcept {
    return k == ShieldKind::rule ? "rule" : "gr1";
}

const Track* Scenario::find_track(const std::string& n) const {
    for (const auto& t : tracks) {
        if (t.name == n) return &t;
    }
    return nullptr;
}

const Crossing* Scenario::find_crossing(int id) const {
    for (const auto& c : crossings) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ValidationError(where + ": " + what);
}

bool finite(const Vec2& v) { return std::isfinite(v.x) && std::isfinite(v.y); }

/// Typed access to one JSON object, with the field path for errors.
class Obj {
public:
    Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) fail(path_.empty() ? "scenario" : path_, "expected an object");
    }

    std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const char* key) const { return j_.contains(key) && !j_[key].is_null(); }

    void allow(std::initializer_list<const char*> keys) const {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            bool ok = false;
            for (const char* k : keys) ok = ok || it.key() == k;
            if (!ok) fail(at(it.key()), "unknown field");
        }
    }

    const json& raw(const char* key) const {
        if (!has(key)) fail(at(key), "missing required field");
        return j_[key];
    }

    double num(const char* key, std::optional<double> def = std::nullopt) const {
        if (!has(key)) {
            if (def) return *def;
            fail(at(key), "missing required field");
        }
        const json& v = j_[key];
        if (!v.is_number()) fail(at(key), "expected a number");
        const double d = v.get<double>();
        if (!std::isfinite(d)) fail(at(key), "expected a finite number");
        return d;
    }

    int integer(const char* key, std::optional<int> def = std::nullopt) const {
        if (!has(key)) {
            if (def) return *def;
            fail(at(key), "missing required field");
        }
        const json& v = j_[key];
        if (!v.is_number_integer()) fail(at(key), "expected an integer");
        return v.get<int>();
    }

    std::string str(const char* key, std::optional<std::string> def = std::nullopt) const {
        if (!has(key)) {
            if (def) return *def;
            fail(at(key), "missing required field");
        }
        const json& v = j_[key];
        if (!v.is_string()) fail(at(key), "expected a string");
        return v.get<std::string>();
    }

    bool boolean(const char* key, bool def) const {
        if (!has(key)) return def;
        if (!j_[key].is_boolean()) fail(at(key), "expected true or false");
        return j_[key].get<bool>();
    }

    Vec2 vec2(const char* key) const { return to_vec2(raw(key), at(key)); }

    static Vec2 to_vec2(const json& v, const std::string& where) {
        if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
            fail(where, "expected [x, y]");
        }
        const Vec2 p{v[0].get<double>(), v[1].get<double>()};
        if (!finite(p)) fail(where, "expected finite coordinates");
        return p;
    }

    /// Each element of an optional array, as (element, path).
    template <class F>
    void each(const char* key, F&& f) const {
        if (!has(key)) return;
        const json& arr = j_[key];
        if (!arr.is_array()) fail(at(key), "expected an array");
        for (std::size_t i = 0; i < arr.size(); ++i) f(arr[i], at(key) + "[" + std::to_string(i) + "]");
    }

private:
    const json& j_;
    std::string path_;
};

Track parse_track(const json& j, const std::string& where, double k) {
    Obj o(j, where);
    o.allow({"name", "points", "cyclic", "shape"});
    const std::string name = o.str("name");
    std::vector<Vec2> pts;
    bool cyclic = true;
    if (o.has("shape")) {
        if (o.has("points")) fail(where, "give either points or shape, not both");
        Obj s(o.raw("shape"), o.at("shape"));
        s.allow({"type", "center", "width", "height", "radius", "spacing", "clockwise"});
        const std::string type = s.str("type");
        if (type != "rounded_rect") fail(s.at("type"), "unknown shape '" + type + "'");
        RoundedRect r;
        r.center = (s.has("center") ? s.vec2("center") : Vec2{}) * k;
        r.width = s.num("width") * k;
        r.height = s.num("height") * k;
        r.radius = s.num("radius", 0.0) * k;
        r.spacing = s.num("spacing", 1.0) * k;
        r.clockwise = s.boolean("clockwise", false);
        try {
            pts = rounded_rect(r);
        } catch (const ValidationError& e) {
            fail(o.at("shape"), e.what());
        }
    } else {
        o.each("points", [&](const json& p, const std::string& at) { pts.push_back(Obj::to_vec2(p, at) * k); });
        if (!o.has("points")) fail(o.at("points"), "missing required field");
        cyclic = o.boolean("cyclic", true);
    }
    try {
        return Track{name, control::WaypointPath(std::move(pts), cyclic)};
    } catch (const ValidationError& e) {
        fail(where, e.what());
    }
}

LightSchedule parse_schedule(const json& j, const std::string& where) {
    Obj o(j, where);
    o.allow({"initial", "red", "yellow", "green"});
    LightSchedule s;
    try {
        s.initial = light_color_from_string(o.str("initial", "red"));
    } catch (const ValidationError& e) {
        fail(o.at("initial"), e.what());
    }
    s.red = o.num("red", s.red);
    s.yellow = o.num("yellow", s.yellow);
    s.green = o.num("green", s.green);
    try {
        s.validate();
    } catch (const ValidationError& e) {
        fail(where, e.what());
    }
    return s;
}

void parse_vehicle_parts(const Obj& o, VehicleSpec& v, double k) {
    if (o.has("params")) {
        Obj p(o.raw("params"), o.at("params"));
        p.allow({"wheelbase", "kp", "kd", "delta_max", "v_max"});
        v.params.wheelbase = p.num("wheelbase", v.params.wheelbase);
        v.params.kp = p.num("kp", v.params.kp);
        v.params.kd = p.num("kd", v.params.kd);
        v.params.delta_max = p.num("delta_max", v.params.delta_max);
        v.params.v_max = p.num("v_max", v.params.v_max);
    }
    auto& c = v.controller;
    c.pp.lookahead *= k;
    c.acc.d_min *= k;
    c.lateral_gap *= k;
    c.leader_horizon *= k;
    if (o.has("controller")) {
        Obj p(o.raw("controller"), o.at("controller"));
        p.allow({"lookahead", "v_nom", "d_min", "t_safe", "lateral_gap", "leader_horizon"});
        c.pp.lookahead = p.num("lookahead", c.pp.lookahead / k) * k;
        c.acc.v_nom = p.num("v_nom", c.acc.v_nom);
        c.acc.d_min = p.num("d_min", c.acc.d_min / k) * k;
        c.acc.t_safe = p.num("t_safe", c.acc.t_safe);
        c.lateral_gap = p.num("lateral_gap", c.lateral_gap / k) * k;
        c.leader_horizon = p.num("leader_horizon", c.leader_horizon / k) * k;
    }
    c.pp.wheelbase = v.params.wheelbase;
    c.pp.delta_max = v.params.delta_max;
    auto& f = v.filter;
    f = f.scaled(k);
    if (o.has("filter")) {
        Obj p(o.raw("filter"), o.at("filter"));
        p.allow({"d_det", "d_emr", "dcl_mode", "dcl_speed"});
        f.d_det = p.num("d_det", f.d_det / k) * k;
        f.d_emr = p.num("d_emr", f.d_emr / k) * k;
        const std::string mode = p.str("dcl_mode", "ramp");
        if (mode == "ramp") {
            f.dcl_mode = safety::DclMode::ramp;
        } else if (mode == "fixed") {
            f.dcl_mode = safety::DclMode::fixed;
        } else {
            fail(p.at("dcl_mode"), "expected ramp or fixed");
        }
        f.dcl_speed = p.num("dcl_speed", f.dcl_speed);
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

void Scenario::validate() const {
    if (version != 1) fail("version", "unsupported version " + std::to_string(version));
    if (!(scale > 0.0)) fail("scale", "must be positive");
    if (!(width > 0.0) || !(height > 0.0)) fail("map", "extent must be positive");
    if (!(sampling.delta_nom > 0.0)) fail("sampling.delta_nom", "must be positive");
    if (!(sampling.jitter >= 0.0 && sampling.jitter < 1.0)) fail("sampling.jitter", "must be in [0, 1)");
    if (!(hazard_horizon > 0.0)) fail("hazard_horizon", "must be positive");
    if (!(commit_time >= 0.0)) fail("commit_time", "must be non-negative");
    if (strategy.empty()) fail("strategy", "must not be empty");

    std::set<std::string> names;
    for (std::size_t i = 0; i < tracks.size(); ++i) {
        const std::string w = "tracks[" + std::to_string(i) + "]";
        if (tracks[i].name.empty()) fail(w + ".name", "must not be empty");
        if (!names.insert(tracks[i].name).second) fail(w + ".name", "duplicate track '" + tracks[i].name + "'");
    }
    std::set<int> ids;
    for (std::size_t i = 0; i < crossings.size(); ++i) {
        const std::string w = "crossings[" + std::to_string(i) + "]";
        const auto& c = crossings[i];
        if (!ids.insert(c.id).second) fail(w + ".id", "duplicate crossing id " + std::to_string(c.id));
        if (!finite(c.a) || !finite(c.b) || c.a == c.b) fail(w, "segment ends must be distinct finite points");
        if (!(c.trigger_radius > 0.0)) fail(w + ".trigger_radius", "must be positive");
    }
    ids.clear();
    for (std::size_t i = 0; i < lights.size(); ++i) {
        const std::string w = "lights[" + std::to_string(i) + "]";
        const auto& l = lights[i];
        if (!ids.insert(l.id).second) fail(w + ".id", "duplicate light id " + std::to_string(l.id));
        try {
            l.schedule.validate();
        } catch (const ValidationError& e) {
            fail(w + ".schedule", e.what());
        }
        for (std::size_t k = 0; k < l.stop_lines.size(); ++k) {
            const std::string ws = w + ".stop_lines[" + std::to_string(k) + "]";
            const Track* t = find_track(l.stop_lines[k].track);
            if (!t) fail(ws + ".track", "unknown track '" + l.stop_lines[k].track + "'");
            const double s = l.stop_lines[k].s;
            if (!(s >= 0.0 && s < t->path.length())) fail(ws + ".s", "not on track '" + t->name + "'");
        }
    }
    ids.clear();
    for (std::size_t i = 0; i < pedestrians.size(); ++i) {
        const std::string w = "pedestrians[" + std::to_string(i) + "]";
        const auto& p = pedestrians[i];
        if (!ids.insert(p.id).second) fail(w + ".id", "duplicate pedestrian id " + std::to_string(p.id));
        if (!find_crossing(p.crossing)) {
            fail(w + ".crossing", "unknown crossing " + std::to_string(p.crossing) + " (scenario has " +
                                      std::to_string(crossings.size()) + ")");
        }
        if (!finite(p.home)) fail(w + ".home", "expected finite coordinates");
        if (!(p.walk_speed > 0.0)) fail(w + ".walk_speed", "must be positive");
        if (!(p.trigger_radius > 0.0)) fail(w + ".trigger_radius", "must be positive");
        if (!(p.gap >= 0.0)) fail(w + ".gap", "must be non-negative");
    }
    ids.clear();
    for (std::size_t i = 0; i < vehicles.size(); ++i) {
        const std::string w = "vehicles[" + std::to_string(i) + "]";
        const auto& v = vehicles[i];
        if (!ids.insert(v.id).second) fail(w + ".id", "duplicate vehicle id " + std::to_string(v.id));
        if (v.id < 0) fail(w + ".id", "must be non-negative");
        const Track* t = find_track(v.track);
        if (!t) fail(w + ".track", "unknown track '" + v.track + "'");
        if (!(v.start_s >= 0.0 && v.start_s < t->path.length())) fail(w + ".start_s", "not on the track");
        try {
            v.params.validate();
            v.controller.validate();
            v.filter.validate();
        } catch (const ValidationError& e) {
            fail(w, e.what());
        }
        if (!(v.v0 >= 0.0 && v.v0 <= v.params.v_max)) fail(w + ".v0", "must be in [0, v_max]");
        if (v.model == ModelKind::twin) {
            if (!v.network) fail(w + ".weights", "twin vehicle needs a network");
            try {
                v.network->validate();
            } catch (const ValidationError& e) {
                fail(w + ".weights", e.what());
            }
        }
    }
}

Scenario parse_scenario(const json& doc, const std::filesystem::path& base_dir) {
    Obj o(doc, "");
    o.allow({"version", "name", "scale", "map", "sampling", "hazard_horizon", "yellow_is_red", "commit_time",
             "strategy", "tracks", "crossings", "lights", "pedestrians", "vehicles"});
    Scenario sc;
    sc.version = o.integer("version", 1);
    if (sc.version != 1) fail("version", "unsupported version " + std::to_string(sc.version));
    sc.name = o.str("name", sc.name);
    sc.scale = o.num("scale", 1.0);
    if (!(sc.scale > 0.0)) fail("scale", "must be positive");
    const double k = sc.scale;
    sc.width *= k;
    sc.height *= k;
    if (o.has("map")) {
        Obj m(o.raw("map"), "map");
        m.allow({"width", "height"});
        sc.width = m.num("width", 70.0) * k;
        sc.height = m.num("height", 30.0) * k;
    }
    if (o.has("sampling")) {
        Obj s(o.raw("sampling"), "sampling");
        s.allow({"delta_nom", "jitter"});
        sc.sampling.delta_nom = s.num("delta_nom", sc.sampling.delta_nom);
        sc.sampling.jitter = s.num("jitter", sc.sampling.jitter);
    }
    sc.hazard_horizon = o.num("hazard_horizon", 30.0) * k;
    sc.yellow_is_red = o.boolean("yellow_is_red", false);
    sc.commit_time = o.num("commit_time", sc.commit_time);
    const std::string strat = o.str("strategy", "paper");
    sc.strategy = strat == "paper" ? strat : resolve(base_dir, strat).string();

    o.each("tracks", [&](const json& j, const std::string& w) { sc.tracks.push_back(parse_track(j, w, k)); });
    o.each("crossings", [&](const json& j, const std::string& w) {
        Obj c(j, w);
        c.allow({"id", "a", "b", "trigger_radius"});
        sc.crossings.push_back({c.integer("id"), c.vec2("a") * k, c.vec2("b") * k, c.num("trigger_radius", 20.0) * k});
    });
    o.each("lights", [&](const json& j, const std::string& w) {
        Obj l(j, w);
        l.allow({"id", "position", "stop_lines", "schedule"});
        Light light;
        light.id = l.integer("id");
        light.position = l.vec2("position") * k;
        if (l.has("schedule")) light.schedule = parse_schedule(l.raw("schedule"), l.at("schedule"));
        l.each("stop_lines", [&](const json& sj, const std::string& sw) {
            Obj s(sj, sw);
            s.allow({"track", "s", "at"});
            StopLine line{s.str("track"), 0.0};
            const Track* t = sc.find_track(line.track);
            if (!t) fail(s.at("track"), "unknown track '" + line.track + "'");
            if (s.has("at") == s.has("s")) fail(sw, "give exactly one of s and at");
            if (s.has("s")) {
                line.s = s.num("s") * k;
            } else {
                const auto pr = t->path.project(s.vec2("at") * k);
                if (pr.distance > 1.0 * k) {
                    fail(s.at("at"), "not on track '" + line.track + "' (" + std::to_string(pr.distance) + " m away)");
                }
                line.s = pr.s;
            }
            light.stop_lines.push_back(line);
        });
        sc.lights.push_back(std::move(light));
    });
    o.each("pedestrians", [&](const json& j, const std::string& w) {
        Obj p(j, w);
        p.allow({"id", "home", "crossing", "walk_speed", "trigger_radius", "gap"});
        PedestrianSpec ped;
        ped.id = p.integer("id");
        ped.home = p.vec2("home") * k;
        ped.crossing = p.integer("crossing");
        const Crossing* c = sc.find_crossing(ped.crossing);
        if (!c) {
            fail(p.at("crossing"), "unknown crossing " + std::to_string(ped.crossing) + " (scenario has " +
                                       std::to_string(sc.crossings.size()) + ")");
        }
        ped.walk_speed = p.num("walk_speed", ped.walk_speed);
        ped.trigger_radius = p.has("trigger_radius") ? p.num("trigger_radius") * k : c->trigger_radius;
        ped.gap = p.num("gap", ped.gap) * k;
        sc.pedestrians.push_back(ped);
    });
    o.each("vehicles", [&](const json& j, const std::string& w) {
        Obj p(j, w);
        p.allow({"id", "model", "track", "direction", "start_s", "v0", "controller", "filter", "shield", "params",
                 "weights"});
        VehicleSpec v;
        v.id = p.integer("id");
        const std::string model = p.str("model", "kinematic");
        if (model == "kinematic") {
            v.model = ModelKind::kinematic;
        } else if (model == "twin") {
            v.model = ModelKind::twin;
        } else if (model == "bridge") {
            v.model = ModelKind::bridge;
        } else {
            fail(p.at("model"), "expected kinematic, twin or bridge");
        }
        v.track = p.str("track");
        if (!sc.find_track(v.track)) fail(p.at("track"), "unknown track '" + v.track + "'");
        const std::string dir = p.str("direction", "forward");
        if (dir == "forward") {
            v.direction = Direction::forward;
        } else if (dir == "reverse") {
            v.direction = Direction::reverse;
        } else {
            fail(p.at("direction"), "expected forward or reverse");
        }
        v.start_s = p.num("start_s", 0.0) * k;
        v.v0 = p.num("v0", 0.0);
        const std::string shield = p.str("shield", "gr1");
        if (shield == "gr1") {
            v.shield = ShieldKind::gr1;
        } else if (shield == "rule") {
            v.shield = ShieldKind::rule;
        } else {
            fail(p.at("shield"), "expected rule or gr1");
        }
        parse_vehicle_parts(p, v, k);
        if (v.model == ModelKind::twin) {
            v.weights = resolve(base_dir, p.str("weights"));
            try {
                v.network = std::make_shared<const twin::TwinNetwork>(twin::load_weights(v.weights));
            } catch (const Error& e) {
                fail(p.at("weights"), e.what());
            }
        } else if (p.has("weights")) {
            fail(p.at("weights"), "only twin vehicles take weights");
        }
        sc.vehicles.push_back(std::move(v));
    });
    sc.validate();
    return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scenario file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_scenario(doc, base);
}

}  // namespace viltwin::sim
