#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "viltwin/twin/gru.hpp"

namespace viltwin::twin {

/// The last T commands and velocities, oldest first.
struct HistoryWindow {
    std::vector<double> u;
    std::vector<double> v;

    std::size_t size() const noexcept { return u.size(); }
    static HistoryWindow zeros(std::size_t length) { return {std::vector<double>(length, 0.0), std::vector<double>(length, 0.0)}; }
    friend bool operator==(const HistoryWindow&, const HistoryWindow&) = default;
};

struct Sample {
    HistoryWindow window;
    double target = 0.0;  ///< v_T [m/s]
    friend bool operator==(const Sample&, const Sample&) = default;
};

struct NetworkShape {
    int window = 20;
    int encoder_hidden = 32;
    int latent = 64;
    int decoder_hidden = 32;

    void validate() const;
    friend bool operator==(const NetworkShape&, const NetworkShape&) = default;
};

/// Per-channel affine input scaling (x - mean) / std; channel 0 is u, 1 is v.
struct Normalizer {
    std::array<double, 2> mean{0.0, 0.0};
    std::array<double, 2> std{1.0, 1.0};

    double normalize(int channel, double x) const { return (x - mean[channel]) / std[channel]; }
    double denormalize(int channel, double z) const { return z * std[channel] + mean[channel]; }

    /// Statistics over every window entry; a zero spread falls back to 1.
    static Normalizer fit(std::span<const Sample> samples);
    friend bool operator==(const Normalizer&, const Normalizer&) = default;
};

struct DenseParams {
    Matrix w;
    Vector b;
};

/// Every trainable tensor of the twin network.
struct TwinParams {
    GruCellParams encoder;
    DenseParams latent;
    GruCellParams decoder;
    DenseParams output;

    static TwinParams zeros(const NetworkShape& shape);

    /// Visits (name, tensor) for every tensor in a fixed order; names look
    /// like "encoder.w_z" or "output.b".
    template <typename Self, typename F>
    static void visit(Self& self, F&& f) {
        GruCellParams::visit(self.encoder, [&](const char* n, auto& t) { f(std::string("encoder.") + n, t); });
        f(std::string("latent.w"), self.latent.w);
        f(std::string("latent.b"), self.latent.b);
        GruCellParams::visit(self.decoder, [&](const char* n, auto& t) { f(std::string("decoder.") + n, t); });
        f(std::string("output.w"), self.output.w);
        f(std::string("output.b"), self.output.b);
    }

    std::size_t parameter_count() const;
    std::vector<double> flatten() const;
    /// Inverse of flatten; the vector length must equal parameter_count().
    void assign(std::span<const double> flat);
};

/// Sequence model v_T = f'(u, v):
///   normalize -> GRU encoder over T steps -> dense + ReLU latent ->
///   GRU decoder (the latent vector as a length-1 input sequence, zero
///   initial state) -> dense output with one unit.
struct TwinNetwork {
    NetworkShape shape;
    Normalizer normalizer;
    TwinParams params;

    static TwinNetwork zeros(const NetworkShape& shape);
    /// Uniform in +-sqrt(1 / fan_in) for every tensor.
    static TwinNetwork random(const NetworkShape& shape, std::uint64_t seed);

    void validate() const;
};

/// Predicted v_T. Throws ValidationError when the window length differs
/// from the network's T.
double forward(const TwinNetwork& net, const HistoryWindow& window);

/// Predictions for many windows at once (same numbers as `forward`).
std::vector<double> forward_batch(const TwinNetwork& net, std::span<const Sample> samples);

struct LossAndGrad {
    double loss = 0.0;
    TwinParams grad;
};

/// Mean squared error over the batch and its gradient by backpropagation
/// through time. Throws ValidationError for an empty batch.
LossAndGrad loss_and_grad(const TwinNetwork& net, std::span<const Sample> batch);

/// Mean squared error only.
double mse(const TwinNetwork& net, std::span<const Sample> samples);

}  // namespace viltwin::twin
