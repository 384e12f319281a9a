#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "viltwin/core/error.hpp"
#include "viltwin/twin/dataset.hpp"
#include "viltwin/twin/network.hpp"

namespace viltwin::twin {

/// Adam with the usual defaults. State is per flattened parameter.
class Adam {
public:
    explicit Adam(std::size_t size, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step(std::vector<double>& params, const std::vector<double>& grad);
    std::size_t steps() const noexcept { return t_; }

private:
    double lr_, beta1_, beta2_, eps_;
    std::vector<double> m_, v_;
    std::size_t t_ = 0;
};

struct TrainConfig {
    NetworkShape shape{};
    int epochs = 200;
    int batch_size = 64;
    double learning_rate = 1e-3;
    SplitFractions fractions{};
    std::uint64_t seed = 0;
    /// Stop after this many epochs without a better validation MSE; 0 never stops early.
    int patience = 0;

    void validate() const;
};

struct EpochMetrics {
    int epoch = 0;
    double train_mse = 0.0;  ///< mean of the minibatch losses
    double val_mse = 0.0;
};

struct TrainResult {
    TwinNetwork network;  ///< weights from the epoch with the lowest val MSE
    std::vector<EpochMetrics> epochs;
    int best_epoch = 0;
    double test_mse = 0.0;
};

class TrainingDiverged : public Error {
public:
    TrainingDiverged(int epoch, const std::string& what) : Error(what), epoch_(epoch) {}
    int epoch() const noexcept { return epoch_; }

private:
    int epoch_;
};

using EpochCallback = std::function<void(const EpochMetrics&)>;

/// Splits the set per config, fits the normalizer on the training part and
/// runs minibatch Adam. Throws TrainingDiverged when a loss turns non-finite.
TrainResult train(const SampleSet& set, const TrainConfig& config, const EpochCallback& on_epoch = {});

/// Same, on an existing split.
TrainResult train(const Split& data, const TrainConfig& config, const EpochCallback& on_epoch = {});

}  // namespace viltwin::twin
