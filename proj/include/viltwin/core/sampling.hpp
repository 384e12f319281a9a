#pragma once

#include <cstdint>

#include "viltwin/core/rng.hpp"

namespace viltwin {

/// Global simulation time. Only moves forward.
class SimClock {
public:
    double now() const noexcept { return t_; }

    /// Throws ValidationError for a negative or non-finite step.
    void advance(double dt);

private:
    double t_ = 0.0;
};

struct SamplingConfig {
    double delta_nom = 0.02;  ///< nominal period [s]
    double jitter = 0.2;      ///< relative half-width of the band, in [0, 1)
    std::uint64_t seed = 0;
};

/// Stationary sampling-interval process. Draws are i.i.d. uniform on
/// [delta_nom * (1 - jitter), delta_nom * (1 + jitter)], so the mean is
/// delta_nom and the distribution never drifts.
class SamplingProcess {
public:
    explicit SamplingProcess(const SamplingConfig& config);

    double sample();

    const SamplingConfig& config() const noexcept { return config_; }
    double mean() const noexcept { return config_.delta_nom; }

private:
    SamplingConfig config_;
    Xoshiro256 rng_;
};

}  // namespace viltwin
