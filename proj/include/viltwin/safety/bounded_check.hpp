#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "viltwin/safety/gr1_spec.hpp"
#include "viltwin/safety/strategy.hpp"

namespace viltwin::safety {

struct TracePoint {
    std::uint32_t env = 0;
    std::uint32_t sys = 0;
    int goal = 0;
};

struct Violation {
    enum class Kind { initial, safety, justice, undefined };
    Kind kind = Kind::safety;
    std::size_t step = 0;            ///< index into `trace` where it shows
    std::vector<TracePoint> trace;   ///< positions visited, in order
    std::size_t loop_start = 0;      ///< justice only: first position of the loop
    std::string constraint;          ///< offending formula text
    std::string message;
};

struct CheckReport {
    std::optional<Violation> safety;   ///< first init/safety/undefined problem
    std::optional<Violation> justice;  ///< first fair lasso starving a goal
    std::size_t words = 0;             ///< env words of full length explored
    bool ok() const noexcept { return !safety && !justice; }
};

constexpr int kMaxCheckHorizon = 12;

/// Exhaustively runs the strategy against every environment word of
/// `horizon` inputs allowed by the env assumptions. Reports the first system
/// init/transition violation, and the first lasso (a repeated
/// (env, sys, goal) position within the horizon) on which every env justice
/// holds somewhere but some system justice never does.
/// Throws ValidationError unless 1 <= horizon <= 12.
CheckReport bounded_check(const Strategy& strategy, const Gr1Spec& spec, int horizon);

std::string to_string(Violation::Kind kind);

}  // namespace viltwin::safety
