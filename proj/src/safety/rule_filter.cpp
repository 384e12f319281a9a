#include "viltwin/safety/rule_filter.hpp"

#include <algorithm>
#include <cmath>

#include "viltwin/core/error.hpp"

namespace viltwin::safety {

void FilterConfig::validate() const {
    if (!(d_emr > 0.0) || !(d_det > d_emr)) throw ValidationError("filter distances must satisfy 0 < d_emr < d_det");
    if (dcl_mode == DclMode::fixed && !(dcl_speed >= 0.0)) throw ValidationError("dcl_speed must be non-negative");
}

FilterConfig FilterConfig::scaled(double k) const {
    FilterConfig c = *this;
    c.d_det *= k;
    c.d_emr *= k;
    return c;
}

std::string_view to_string(DriveState s) noexcept {
    switch (s) {
        case DriveState::MOV:
            return "MOV";
        case DriveState::DCL:
            return "DCL";
        case DriveState::STP:
            return "STP";
    }
    return "?";
}

DriveState drive_state_from_string(std::string_view name) {
    if (name == "MOV") return DriveState::MOV;
    if (name == "DCL") return DriveState::DCL;
    if (name == "STP") return DriveState::STP;
    throw ValidationError("unknown drive state '" + std::string(name) + "'");
}

namespace {

void check_d(std::optional<double> d) {
    if (d && !(*d >= 0.0)) throw ValidationError("hazard distance must be non-negative");
}

double dcl_speed(double v_cmd, double d, const FilterConfig& c) {
    if (c.dcl_mode == DclMode::fixed) return std::min(v_cmd, c.dcl_speed);
    return std::clamp(v_cmd * (d - c.d_emr) / (c.d_det - c.d_emr), 0.0, v_cmd);
}

}  // namespace

DriveState band_of(std::optional<double> d, const FilterConfig& config) {
    check_d(d);
    if (!d || *d > config.d_det) return DriveState::MOV;
    if (*d > config.d_emr) return DriveState::DCL;
    return DriveState::STP;
}

double rule_filter(double v_cmd, std::optional<double> d, const FilterConfig& config) {
    if (!(v_cmd >= 0.0)) throw ValidationError("v_cmd must be non-negative");
    switch (band_of(d, config)) {
        case DriveState::MOV:
            return v_cmd;
        case DriveState::DCL:
            return dcl_speed(v_cmd, *d, config);
        case DriveState::STP:
            return 0.0;
    }
    return 0.0;
}

EnvFlags flags_from_distance(std::optional<double> d, const FilterConfig& config) {
    switch (band_of(d, config)) {
        case DriveState::STP:
            return {true, false};
        case DriveState::DCL:
            return {false, true};
        case DriveState::MOV:
            break;
    }
    return {false, false};
}

double apply_drive_state(DriveState state, double v_cmd, std::optional<double> d, const FilterConfig& config) {
    check_d(d);
    switch (state) {
        case DriveState::MOV:
            return v_cmd;
        case DriveState::STP:
            return 0.0;
        case DriveState::DCL:
            if (!d || *d > config.d_det) return v_cmd;
            return dcl_speed(v_cmd, *d, config);
    }
    return 0.0;
}

DriveEncoding DriveEncoding::of(const Gr1Spec& spec) {
    auto find = [](const std::vector<std::string>& names, const char* n) {
        auto it = std::find(names.begin(), names.end(), n);
        if (it == names.end()) throw ValidationError(std::string("strategy has no variable ") + n);
        return static_cast<int>(it - names.begin());
    };
    DriveEncoding enc;
    enc.urg_bit = find(spec.env_vars, "URG");
    enc.wrn_bit = find(spec.env_vars, "WRN");
    enc.mov_bit = find(spec.sys_vars, "MOV");
    enc.dcl_bit = find(spec.sys_vars, "DCL");
    enc.stp_bit = find(spec.sys_vars, "STP");
    return enc;
}

std::uint32_t DriveEncoding::env(const EnvFlags& f) const {
    return (f.urg ? 1U << urg_bit : 0U) | (f.wrn ? 1U << wrn_bit : 0U);
}

std::uint32_t DriveEncoding::sys(DriveState s) const {
    switch (s) {
        case DriveState::MOV:
            return 1U << mov_bit;
        case DriveState::DCL:
            return 1U << dcl_bit;
        case DriveState::STP:
            return 1U << stp_bit;
    }
    return 0;
}

DriveState DriveEncoding::state(std::uint32_t v) const {
    const std::uint32_t mask = (1U << mov_bit) | (1U << dcl_bit) | (1U << stp_bit);
    const std::uint32_t bits = v & mask;
    if (bits == 1U << mov_bit) return DriveState::MOV;
    if (bits == 1U << dcl_bit) return DriveState::DCL;
    if (bits == 1U << stp_bit) return DriveState::STP;
    throw ValidationError("system valuation is not one-hot over MOV/DCL/STP");
}

DriveShield::DriveShield(const Strategy& strategy)
    : strategy_(&strategy), enc_(DriveEncoding::of(strategy.spec())), state_(strategy.initial()),
      current_(DriveState::MOV) {}

DriveShield::DriveShield(const Strategy& strategy, DriveState start)
    : strategy_(&strategy), enc_(DriveEncoding::of(strategy.spec())), current_(start) {
    state_ = strategy.start_from(enc_.sys(start));
}

DriveShield::Decision DriveShield::step(const EnvFlags& flags) {
    const Step st = strategy_->execute(state_, enc_.env(flags));
    Decision d;
    d.assumption_violated = st.assumption_violated;
    d.diagnostic = st.diagnostic;
    if (st.assumption_violated) {
        d.state = current_;
        return d;
    }
    state_ = st.next;
    current_ = enc_.state(st.output);
    d.state = current_;
    return d;
}

EquivalenceReport equivalence_scan(const Strategy& strategy, const FilterConfig& config, double v_cmd) {
    config.validate();
    EquivalenceReport rep;
    for (int i = 0; i <= 3000; ++i) {
        const double d = i / 100.0;
        ++rep.samples;
        const DriveState band = band_of(d, config);
        const double expected = rule_filter(v_cmd, d, config);
        bool covered = false;
        for (DriveState start : {DriveState::MOV, DriveState::DCL, DriveState::STP}) {
            DriveShield shield(strategy, start);
            const auto dec = shield.step(flags_from_distance(d, config));
            if (dec.assumption_violated || dec.state != band) continue;
            covered = true;
            ++rep.compared;
            if (apply_drive_state(dec.state, v_cmd, d, config) != expected) {
                ++rep.mismatches;
                if (!rep.first_mismatch_d) rep.first_mismatch_d = d;
            }
        }
        if (!covered) ++rep.uncovered;
    }
    return rep;
}

}  // namespace viltwin::safety
