#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "viltwin/safety/strategy.hpp"

namespace viltwin::safety {

enum class DclMode {
    ramp,   ///< v_cmd (d - d_emr) / (d_det - d_emr)
    fixed,  ///< min(v_cmd, dcl_speed)
};

struct FilterConfig {
    double d_det = 15.0;  ///< detection distance [m]
    double d_emr = 10.0;  ///< emergency distance [m]
    DclMode dcl_mode = DclMode::ramp;
    double dcl_speed = 1.0;  ///< only for DclMode::fixed [m/s]

    void validate() const;
    /// Copy with both distances multiplied by `k`.
    FilterConfig scaled(double k) const;
};

struct EnvFlags {
    bool urg = false;
    bool wrn = false;
    friend bool operator==(const EnvFlags&, const EnvFlags&) = default;
};

enum class DriveState { MOV, DCL, STP };

std::string_view to_string(DriveState s) noexcept;
DriveState drive_state_from_string(std::string_view name);

/// Hand-written filter:
///   no hazard or d > d_det  -> v_cmd
///   d_emr < d <= d_det      -> deceleration speed
///   d <= d_emr              -> 0
/// Throws ValidationError for v_cmd < 0 or d < 0.
double rule_filter(double v_cmd, std::optional<double> d, const FilterConfig& config);

/// d <= d_emr -> URG; d_emr < d <= d_det -> WRN; otherwise neither.
EnvFlags flags_from_distance(std::optional<double> d, const FilterConfig& config);

/// Speed for a drive state: MOV passes v_cmd, STP gives 0, DCL the
/// deceleration speed at the current d (v_cmd without a hazard, floor 0).
double apply_drive_state(DriveState state, double v_cmd, std::optional<double> d, const FilterConfig& config);

/// The rule-filter branch a distance falls into.
DriveState band_of(std::optional<double> d, const FilterConfig& config);

/// Valuation encoding for strategies over env {URG, WRN} and sys
/// {MOV, DCL, STP}, looked up by variable name.
struct DriveEncoding {
    int urg_bit = 0, wrn_bit = 1;
    int mov_bit = 0, dcl_bit = 1, stp_bit = 2;

    /// Throws ValidationError when the spec lacks one of the names.
    static DriveEncoding of(const Gr1Spec& spec);

    std::uint32_t env(const EnvFlags& f) const;
    std::uint32_t sys(DriveState s) const;
    /// Throws ValidationError when the valuation is not one-hot.
    DriveState state(std::uint32_t sys) const;
};

/// A vehicle's runtime view of a drive-state strategy.
class DriveShield {
public:
    explicit DriveShield(const Strategy& strategy);
    DriveShield(const Strategy& strategy, DriveState start);

    struct Decision {
        DriveState state;
        bool assumption_violated = false;
        std::string diagnostic;
    };

    /// Feeds the current flags and returns the drive state to apply now.
    Decision step(const EnvFlags& flags);
    DriveState current() const noexcept { return current_; }

private:
    const Strategy* strategy_;
    DriveEncoding enc_;
    StrategyState state_;
    DriveState current_;
};

struct EquivalenceReport {
    std::size_t samples = 0;     ///< distances swept
    std::size_t compared = 0;    ///< (distance, start state) pairs whose next state matched the band
    std::size_t mismatches = 0;  ///< compared pairs with different speeds
    std::size_t uncovered = 0;   ///< distances where no start state reached the band
    std::optional<double> first_mismatch_d;
    bool ok() const noexcept { return mismatches == 0 && uncovered == 0; }
};

/// Sweeps d = 0, 0.01, ..., 30 m. For every start state, one strategy step
/// on flags_from_distance(d); where the resulting state is the band's state,
/// the two filters must give the same speed.
EquivalenceReport equivalence_scan(const Strategy& strategy, const FilterConfig& config, double v_cmd);

}  // namespace viltwin::safety
