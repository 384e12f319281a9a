#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "viltwin/safety/gr1_spec.hpp"

namespace viltwin::safety {

/// Where a strategy execution currently is. `sys` is the system valuation
/// currently held (absent before the first input), `goal` the system
/// justice index being pursued, and `prev` the last joint position, used to
/// check the environment transition assumption.
struct StrategyState {
    std::optional<std::uint32_t> sys;
    int goal = 0;
    std::optional<std::pair<std::uint32_t, std::uint32_t>> prev;

    friend bool operator==(const StrategyState&, const StrategyState&) = default;
};

struct Step {
    StrategyState next;
    std::uint32_t output = 0;         ///< system valuation for the next step
    bool assumption_violated = false; ///< output is the held valuation
    std::string diagnostic;
};

/// Deterministic finite-memory controller produced by the solver. Machine
/// states are (sys valuation, goal); on env input e it moves to
/// (next sys valuation, next goal). Undefined entries are positions outside
/// the winning region, which assumption-abiding environments never reach.
class Strategy {
public:
    Strategy(Gr1Spec spec, int goals, std::vector<std::int32_t> next_sys, std::vector<std::int32_t> next_goal,
             std::vector<std::int32_t> init_sys);

    const Gr1Spec& spec() const noexcept { return spec_; }
    const CompiledSpec& compiled() const noexcept { return compiled_; }
    int goals() const noexcept { return goals_; }

    StrategyState initial() const { return {}; }
    /// Resumes from an arbitrary system valuation with goal 0, no history.
    StrategyState start_from(std::uint32_t sys) const;

    /// One Mealy transition. An input violating the environment assumptions
    /// (or a position outside the winning region) holds the current output
    /// and reports it instead of throwing.
    Step execute(const StrategyState& state, std::uint32_t env) const;

    /// -1 when undefined.
    std::int32_t next_sys(std::uint32_t sys, int goal, std::uint32_t env) const;
    std::int32_t next_goal(std::uint32_t sys, int goal, std::uint32_t env) const;
    std::int32_t init_sys(std::uint32_t env) const { return init_sys_.at(env); }

    /// Overwrites one table entry; for building mutants in tests and audits.
    void set_transition(std::uint32_t sys, int goal, std::uint32_t env, std::int32_t to_sys, std::int32_t to_goal);

    /// Number of defined (state, input) entries.
    std::size_t defined_transitions() const;

    friend bool operator==(const Strategy& a, const Strategy& b) {
        return a.spec_ == b.spec_ && a.goals_ == b.goals_ && a.next_sys_ == b.next_sys_ &&
               a.next_goal_ == b.next_goal_ && a.init_sys_ == b.init_sys_;
    }

private:
    std::size_t index(std::uint32_t sys, int goal, std::uint32_t env) const;

    Gr1Spec spec_;
    CompiledSpec compiled_;
    int goals_;
    std::vector<std::int32_t> next_sys_;
    std::vector<std::int32_t> next_goal_;
    std::vector<std::int32_t> init_sys_;
};

/// {"version", "spec", "goals", "init": [{env, sys}], "transitions":
///  [{"from": {sys, goal}, "env", "to": {sys, goal}}]} with valuations as
/// name -> bool objects.
nlohmann::json strategy_to_json(const Strategy& strategy);
Strategy strategy_from_json(const nlohmann::json& doc);
void save_strategy(const Strategy& strategy, const std::filesystem::path& path);
Strategy load_strategy(const std::filesystem::path& path);

}  // namespace viltwin::safety
