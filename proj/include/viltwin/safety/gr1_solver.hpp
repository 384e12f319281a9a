#pragma once

#include <optional>
#include <string>

#include "viltwin/safety/gr1_spec.hpp"
#include "viltwin/safety/strategy.hpp"

namespace viltwin::safety {

struct SolveResult {
    bool realizable = false;
    std::optional<Strategy> strategy;
    std::string reason;  ///< why the spec is unrealizable, empty otherwise
    std::size_t winning_positions = 0;
    int iterations = 0;  ///< outer fixpoint rounds
};

/// Explicit-state GR(1) game solver. Positions are joint valuations (e, s);
/// the system moves first and must commit to s' before seeing e' (Moore
/// semantics). The winning region is the three-nested fixpoint
///   nu Z. AND_j mu Y. OR_i nu X. (J_j & CPre Z) | CPre Y | (!A_i & CPre X)
/// with J_j the system and A_i the environment justice conditions.
/// Strategy extraction prefers, in order: reaching goal j and moving into Z
/// (switching to goal j+1), descending one rank, staying in the lowest
/// X layer whose environment justice is currently false. Ties go to the
/// lowest successor valuation.
///
/// Throws ValidationError for a malformed spec or a state space above the
/// explicit-enumeration cap.
SolveResult solve_gr1(const Gr1Spec& spec);

}  // namespace viltwin::safety
