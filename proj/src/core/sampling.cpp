#include "viltwin/core/sampling.hpp"

#include <cmath>
#include <string>

#include "viltwin/core/error.hpp"

namespace viltwin {

void SimClock::advance(double dt) {
    if (!std::isfinite(dt) || dt < 0.0) {
        throw ValidationError("clock step must be finite and non-negative, got " + std::to_string(dt));
    }
    t_ += dt;
}

SamplingProcess::SamplingProcess(const SamplingConfig& config) : config_(config), rng_(config.seed) {
    if (!(config.delta_nom > 0.0) || !std::isfinite(config.delta_nom)) {
        throw ValidationError("sampling period must be positive");
    }
    if (!(config.jitter >= 0.0 && config.jitter < 1.0)) {
        throw ValidationError("sampling jitter must lie in [0, 1)");
    }
}

double SamplingProcess::sample() {
    const double u = rng_.uniform();
    if (config_.jitter == 0.0) return config_.delta_nom;
    return config_.delta_nom * (1.0 + config_.jitter * (2.0 * u - 1.0));
}

}  // namespace viltwin
