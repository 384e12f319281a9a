#include "viltwin/twin/train.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "viltwin/core/rng.hpp"

namespace viltwin::twin {

Adam::Adam(std::size_t size, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0) {}

void Adam::step(std::vector<double>& params, const std::vector<double>& grad) {
    if (params.size() != m_.size() || grad.size() != m_.size()) throw ValidationError("Adam size mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
        v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
        const double m_hat = m_[i] / c1;
        const double v_hat = v_[i] / c2;
        params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
    }
}

void TrainConfig::validate() const {
    shape.validate();
    fractions.validate();
    if (epochs < 1) throw ValidationError("epochs must be positive");
    if (batch_size < 1) throw ValidationError("batch size must be positive");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
        throw ValidationError("learning rate must be finite and non-negative");
    }
    if (patience < 0) throw ValidationError("patience must be non-negative");
}

TrainResult train(const SampleSet& set, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    return train(split(set, config.fractions, config.seed), config, on_epoch);
}

TrainResult train(const Split& data, const TrainConfig& config, const EpochCallback& on_epoch) {
    config.validate();
    if (data.train.empty() || data.val.empty() || data.test.empty()) {
        throw ValidationError("train, validation and test sets must all be non-empty");
    }
    TwinNetwork net = TwinNetwork::random(config.shape, config.seed);
    net.normalizer = Normalizer::fit(data.train.samples);

    Xoshiro256 rng(config.seed ^ 0x7a1d7a1d7a1d7a1dULL);
    std::vector<double> flat = net.params.flatten();
    Adam adam(flat.size(), config.learning_rate);

    TrainResult result;
    result.network = net;
    double best_val = mse(net, data.val.samples);
    result.best_epoch = 0;

    const std::size_t n = data.train.size();
    const auto batch = static_cast<std::size_t>(config.batch_size);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Sample> buffer;
    buffer.reserve(batch);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        seeded_shuffle(order, rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t at = 0; at < n; at += batch) {
            buffer.clear();
            for (std::size_t i = at; i < std::min(n, at + batch); ++i) buffer.push_back(data.train.samples[order[i]]);
            const LossAndGrad lg = loss_and_grad(net, buffer);
            if (!std::isfinite(lg.loss)) {
                throw TrainingDiverged(epoch, "training diverged at epoch " + std::to_string(epoch) +
                                                  ": loss is not finite");
            }
            loss_sum += lg.loss;
            ++batches;
            adam.step(flat, lg.grad.flatten());
            net.params.assign(flat);
        }
        EpochMetrics m{epoch, loss_sum / static_cast<double>(batches), mse(net, data.val.samples)};
        if (!std::isfinite(m.val_mse)) {
            throw TrainingDiverged(epoch, "training diverged at epoch " + std::to_string(epoch) +
                                              ": validation loss is not finite");
        }
        result.epochs.push_back(m);
        if (on_epoch) on_epoch(m);
        if (m.val_mse < best_val) {
            best_val = m.val_mse;
            result.best_epoch = epoch;
            result.network = net;
        } else if (config.patience > 0 && epoch - result.best_epoch >= config.patience) {
            break;
        }
    }
    result.test_mse = mse(result.network, data.test.samples);
    return result;
}

}  // namespace viltwin::twin
