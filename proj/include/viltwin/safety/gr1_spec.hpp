#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "viltwin/safety/formula.hpp"

namespace viltwin::safety {

/// Assume-guarantee specification in GR(1) form:
///   (env_init & G env_safety & GF env_justice) ->
///   (sys_init & G sys_safety & GF sys_justice)
/// Constraints are formula strings; a primed variable is its next-step value.
struct Gr1Spec {
    std::vector<std::string> env_vars;
    std::vector<std::string> sys_vars;
    std::vector<std::string> env_init;
    std::vector<std::string> env_safety;
    std::vector<std::string> env_justice;
    std::vector<std::string> sys_init;
    std::vector<std::string> sys_safety;
    std::vector<std::string> sys_justice;

    /// Parses and binds every constraint; throws ValidationError for an
    /// undeclared variable, a misplaced prime, a duplicate name or an empty
    /// justice list.
    void validate() const;

    friend bool operator==(const Gr1Spec&, const Gr1Spec&) = default;
};

nlohmann::json spec_to_json(const Gr1Spec& spec);
Gr1Spec spec_from_json(const nlohmann::json& doc);
void save_spec(const Gr1Spec& spec, const std::filesystem::path& path);
Gr1Spec load_spec(const std::filesystem::path& path);

/// The traffic-rule specification over env {URG, WRN} and one-hot sys
/// {MOV, DCL, STP}.
Gr1Spec build_paper_spec();

/// Parsed spec with variables bound to bit positions: env variable k is bit
/// k of a joint valuation, sys variable k is bit (env count + k).
class CompiledSpec {
public:
    explicit CompiledSpec(const Gr1Spec& spec);

    const Gr1Spec& source() const noexcept { return spec_; }
    int env_bits() const noexcept { return static_cast<int>(spec_.env_vars.size()); }
    int sys_bits() const noexcept { return static_cast<int>(spec_.sys_vars.size()); }
    std::uint32_t env_count() const noexcept { return 1U << env_bits(); }
    std::uint32_t sys_count() const noexcept { return 1U << sys_bits(); }
    std::uint64_t position_count() const noexcept { return std::uint64_t{1} << (env_bits() + sys_bits()); }

    std::uint64_t join(std::uint32_t env, std::uint32_t sys) const noexcept {
        return static_cast<std::uint64_t>(env) | (static_cast<std::uint64_t>(sys) << env_bits());
    }

    bool env_init(std::uint32_t e) const;
    bool sys_init(std::uint32_t e, std::uint32_t s) const;
    /// Environment transition from (e, s) to next env e2.
    bool env_trans(std::uint32_t e, std::uint32_t s, std::uint32_t e2) const;
    /// System transition from (e, s) to (e2, s2).
    bool sys_trans(std::uint32_t e, std::uint32_t s, std::uint32_t e2, std::uint32_t s2) const;
    /// Index of the first violated sys safety formula, or -1.
    int first_sys_violation(std::uint32_t e, std::uint32_t s, std::uint32_t e2, std::uint32_t s2) const;
    bool env_justice(std::size_t i, std::uint32_t e, std::uint32_t s) const;
    bool sys_justice(std::size_t j, std::uint32_t e, std::uint32_t s) const;

    std::size_t env_justice_count() const noexcept { return env_justice_.size(); }
    std::size_t sys_justice_count() const noexcept { return sys_justice_.size(); }
    const std::vector<Formula>& sys_safety() const noexcept { return sys_safety_; }
    const std::vector<Formula>& sys_justice_formulas() const noexcept { return sys_justice_; }

    /// "URG=0 WRN=1 | MOV=1 DCL=0 STP=0"
    std::string describe(std::uint32_t e, std::uint32_t s) const;

private:
    Gr1Spec spec_;
    std::vector<Formula> env_init_, env_safety_, env_justice_, sys_init_, sys_safety_, sys_justice_;
};

}  // namespace viltwin::safety
