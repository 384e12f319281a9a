#include "viltwin/safety/strategy.hpp"

#include <fstream>

#include "viltwin/core/error.hpp"

namespace viltwin::safety {

using nlohmann::json;

namespace {

constexpr int kStrategyVersion = 1;

json valuation_json(const std::vector<std::string>& names, std::uint32_t bits) {
    json obj = json::object();
    for (std::size_t k = 0; k < names.size(); ++k) obj[names[k]] = static_cast<bool>((bits >> k) & 1U);
    return obj;
}

std::uint32_t valuation_from(const json& obj, const std::vector<std::string>& names, const std::string& where) {
    if (!obj.is_object()) throw ValidationError(where + ": expected an object of booleans");
    std::uint32_t bits = 0;
    for (std::size_t k = 0; k < names.size(); ++k) {
        if (!obj.contains(names[k]) || !obj[names[k]].is_boolean()) {
            throw ValidationError(where + "." + names[k] + ": expected a boolean");
        }
        if (obj[names[k]].get<bool>()) bits |= 1U << k;
    }
    if (obj.size() != names.size()) throw ValidationError(where + ": unexpected extra variables");
    return bits;
}

int int_from(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || !obj[key].is_number_integer()) {
        throw ValidationError(where + "." + key + ": expected an integer");
    }
    return obj[key].get<int>();
}

}  // namespace

Strategy::Strategy(Gr1Spec spec, int goals, std::vector<std::int32_t> next_sys, std::vector<std::int32_t> next_goal,
                   std::vector<std::int32_t> init_sys)
    : spec_(std::move(spec)),
      compiled_(spec_),
      goals_(goals),
      next_sys_(std::move(next_sys)),
      next_goal_(std::move(next_goal)),
      init_sys_(std::move(init_sys)) {
    if (goals_ < 1) throw ValidationError("strategy needs at least one goal");
    const std::size_t size = static_cast<std::size_t>(compiled_.position_count()) * static_cast<std::size_t>(goals_);
    if (next_sys_.size() != size || next_goal_.size() != size) throw ValidationError("strategy table has wrong size");
    if (init_sys_.size() != compiled_.env_count()) throw ValidationError("strategy init table has wrong size");
}

std::size_t Strategy::index(std::uint32_t sys, int goal, std::uint32_t env) const {
    if (sys >= compiled_.sys_count() || env >= compiled_.env_count() || goal < 0 || goal >= goals_) {
        throw ValidationError("strategy lookup out of range");
    }
    return (static_cast<std::size_t>(sys) * static_cast<std::size_t>(goals_) + static_cast<std::size_t>(goal)) *
               compiled_.env_count() +
           env;
}

std::int32_t Strategy::next_sys(std::uint32_t sys, int goal, std::uint32_t env) const {
    return next_sys_[index(sys, goal, env)];
}

std::int32_t Strategy::next_goal(std::uint32_t sys, int goal, std::uint32_t env) const {
    return next_goal_[index(sys, goal, env)];
}

void Strategy::set_transition(std::uint32_t sys, int goal, std::uint32_t env, std::int32_t to_sys,
                              std::int32_t to_goal) {
    const std::size_t i = index(sys, goal, env);
    if (to_sys >= static_cast<std::int32_t>(compiled_.sys_count()) || to_goal >= goals_) {
        throw ValidationError("transition target out of range");
    }
    next_sys_[i] = to_sys;
    next_goal_[i] = to_goal;
}

std::size_t Strategy::defined_transitions() const {
    std::size_t n = 0;
    for (auto v : next_sys_) n += v >= 0 ? 1 : 0;
    return n;
}

StrategyState Strategy::start_from(std::uint32_t sys) const {
    if (sys >= compiled_.sys_count()) throw ValidationError("system valuation out of range");
    return {sys, 0, std::nullopt};
}

Step Strategy::execute(const StrategyState& state, std::uint32_t env) const {
    if (env >= compiled_.env_count()) throw ValidationError("environment valuation out of range");
    Step out;
    std::uint32_t sys = 0;
    auto hold = [&](std::uint32_t held, std::string why) {
        out.next = state;
        out.output = held;
        out.assumption_violated = true;
        out.diagnostic = std::move(why);
        return out;
    };
    if (!state.sys) {
        if (!compiled_.env_init(env)) {
            // Nothing has been output yet; hold the lowest valuation allowed at start.
            std::uint32_t fallback = 0;
            for (std::uint32_t s = 0; s < compiled_.sys_count(); ++s) {
                if (compiled_.sys_init(env, s)) {
                    fallback = s;
                    break;
                }
            }
            return hold(fallback, "initial input violates env_init: " + compiled_.describe(env, fallback));
        }
        const std::int32_t s0 = init_sys_[env];
        if (s0 < 0) return hold(0, "no winning initial system valuation for " + compiled_.describe(env, 0));
        sys = static_cast<std::uint32_t>(s0);
    } else {
        sys = *state.sys;
        if (state.prev && !compiled_.env_trans(state.prev->first, state.prev->second, env)) {
            return hold(sys, "input violates env_safety: " + compiled_.describe(env, sys));
        }
    }
    const std::size_t i = index(sys, state.goal, env);
    if (next_sys_[i] < 0) return hold(sys, "position outside the winning region: " + compiled_.describe(env, sys));
    out.output = static_cast<std::uint32_t>(next_sys_[i]);
    out.next.sys = out.output;
    out.next.goal = next_goal_[i];
    out.next.prev = std::make_pair(env, sys);
    return out;
}

json strategy_to_json(const Strategy& st) {
    const auto& spec = st.spec();
    const auto& cs = st.compiled();
    json init = json::array();
    for (std::uint32_t e = 0; e < cs.env_count(); ++e) {
        if (st.init_sys(e) < 0) continue;
        init.push_back({{"env", valuation_json(spec.env_vars, e)},
                        {"sys", valuation_json(spec.sys_vars, static_cast<std::uint32_t>(st.init_sys(e)))}});
    }
    json trans = json::array();
    for (std::uint32_t s = 0; s < cs.sys_count(); ++s) {
        for (int g = 0; g < st.goals(); ++g) {
            for (std::uint32_t e = 0; e < cs.env_count(); ++e) {
                const auto to = st.next_sys(s, g, e);
                if (to < 0) continue;
                trans.push_back({{"from", {{"sys", valuation_json(spec.sys_vars, s)}, {"goal", g}}},
                                 {"env", valuation_json(spec.env_vars, e)},
                                 {"to",
                                  {{"sys", valuation_json(spec.sys_vars, static_cast<std::uint32_t>(to))},
                                   {"goal", st.next_goal(s, g, e)}}}});
            }
        }
    }
    return json{{"version", kStrategyVersion}, {"spec", spec_to_json(spec)}, {"goals", st.goals()},
                {"init", std::move(init)},      {"transitions", std::move(trans)}};
}

Strategy strategy_from_json(const json& doc) {
    if (!doc.is_object()) throw ValidationError("strategy must be a JSON object");
    if (!doc.contains("version") || doc["version"] != kStrategyVersion) {
        throw ValidationError("version: unsupported strategy version");
    }
    if (!doc.contains("spec")) throw ValidationError("spec: missing");
    Gr1Spec spec = spec_from_json(doc["spec"]);
    const int goals = int_from(doc, "goals", "strategy");
    if (goals != static_cast<int>(spec.sys_justice.size())) {
        throw ValidationError("goals: must equal the number of sys_justice constraints");
    }
    const CompiledSpec cs(spec);
    const std::size_t size = static_cast<std::size_t>(cs.position_count()) * static_cast<std::size_t>(goals);
    std::vector<std::int32_t> init_table(cs.env_count(), -1);
    if (!doc.contains("init") || !doc["init"].is_array()) throw ValidationError("init: expected a list");
    for (std::size_t k = 0; k < doc["init"].size(); ++k) {
        const json& entry = doc["init"][k];
        const std::string where = "init[" + std::to_string(k) + "]";
        if (!entry.is_object() || !entry.contains("env") || !entry.contains("sys")) {
            throw ValidationError(where + ": expected {env, sys}");
        }
        const auto e = valuation_from(entry["env"], spec.env_vars, where + ".env");
        init_table[e] = static_cast<std::int32_t>(valuation_from(entry["sys"], spec.sys_vars, where + ".sys"));
    }
    if (!doc.contains("transitions") || !doc["transitions"].is_array()) {
        throw ValidationError("transitions: expected a list");
    }
    std::vector<std::int32_t> ns(size, -1), ng(size, -1);
    Strategy built(spec, goals, ns, ng, init_table);
    for (std::size_t k = 0; k < doc["transitions"].size(); ++k) {
        const json& t = doc["transitions"][k];
        const std::string where = "transitions[" + std::to_string(k) + "]";
        if (!t.is_object() || !t.contains("from") || !t.contains("env") || !t.contains("to")) {
            throw ValidationError(where + ": expected {from, env, to}");
        }
        const auto s = valuation_from(t["from"]["sys"], spec.sys_vars, where + ".from.sys");
        const int g = int_from(t["from"], "goal", where + ".from");
        const auto e = valuation_from(t["env"], spec.env_vars, where + ".env");
        const auto s2 = valuation_from(t["to"]["sys"], spec.sys_vars, where + ".to.sys");
        const int g2 = int_from(t["to"], "goal", where + ".to");
        if (g < 0 || g >= goals || g2 < 0 || g2 >= goals) throw ValidationError(where + ": goal out of range");
        built.set_transition(s, g, e, static_cast<std::int32_t>(s2), g2);
    }
    return built;
}

void save_strategy(const Strategy& strategy, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write strategy to " + path.string());
    out << strategy_to_json(strategy).dump(1) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

Strategy load_strategy(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open strategy file " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return strategy_from_json(doc);
}

}  // namespace viltwin::safety
