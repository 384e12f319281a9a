#include "viltwin/twin/network.hpp"

#include <cmath>
#include <string>

#include "viltwin/core/error.hpp"
#include "viltwin/core/rng.hpp"

namespace viltwin::twin {

void NetworkShape::validate() const {
    if (window < 1) throw ValidationError("window length T must be at least 1");
    if (encoder_hidden < 1 || latent < 1 || decoder_hidden < 1) {
        throw ValidationError("layer sizes must be positive");
    }
}

Normalizer Normalizer::fit(std::span<const Sample> samples) {
    Normalizer n;
    for (int ch = 0; ch < 2; ++ch) {
        double sum = 0.0;
        double count = 0.0;
        for (const auto& s : samples) {
            for (double x : ch == 0 ? s.window.u : s.window.v) {
                sum += x;
                count += 1.0;
            }
        }
        if (count == 0.0) continue;
        const double mean = sum / count;
        double var = 0.0;
        for (const auto& s : samples) {
            for (double x : ch == 0 ? s.window.u : s.window.v) var += (x - mean) * (x - mean);
        }
        const double sd = std::sqrt(var / count);
        n.mean[ch] = mean;
        n.std[ch] = sd > 1e-12 ? sd : 1.0;
    }
    return n;
}

TwinParams TwinParams::zeros(const NetworkShape& shape) {
    shape.validate();
    TwinParams p;
    p.encoder = GruCellParams::zeros(2, shape.encoder_hidden);
    p.latent = {Matrix::Zero(shape.latent, shape.encoder_hidden), Vector::Zero(shape.latent)};
    p.decoder = GruCellParams::zeros(shape.latent, shape.decoder_hidden);
    p.output = {Matrix::Zero(1, shape.decoder_hidden), Vector::Zero(1)};
    return p;
}

std::size_t TwinParams::parameter_count() const {
    std::size_t n = 0;
    visit(*this, [&](const std::string&, const auto& t) { n += static_cast<std::size_t>(t.size()); });
    return n;
}

std::vector<double> TwinParams::flatten() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    visit(*this, [&](const std::string&, const auto& t) { flat.insert(flat.end(), t.data(), t.data() + t.size()); });
    return flat;
}

void TwinParams::assign(std::span<const double> flat) {
    if (flat.size() != parameter_count()) throw ValidationError("flat parameter vector has the wrong length");
    std::size_t at = 0;
    visit(*this, [&](const std::string&, auto& t) {
        std::copy_n(flat.data() + at, t.size(), t.data());
        at += static_cast<std::size_t>(t.size());
    });
}

TwinNetwork TwinNetwork::zeros(const NetworkShape& shape) { return {shape, Normalizer{}, TwinParams::zeros(shape)}; }

TwinNetwork TwinNetwork::random(const NetworkShape& shape, std::uint64_t seed) {
    TwinNetwork net = zeros(shape);
    Xoshiro256 rng(seed);
    auto fill = [&rng](auto& t, int fan_in) {
        const double bound = std::sqrt(1.0 / fan_in);
        for (Eigen::Index i = 0; i < t.size(); ++i) t.data()[i] = rng.uniform(-bound, bound);
    };
    auto fill_cell = [&](GruCellParams& c) {
        for (Matrix* w : {&c.w_z, &c.w_r, &c.w_h}) fill(*w, c.input_size());
        for (Matrix* u : {&c.u_z, &c.u_r, &c.u_h}) fill(*u, c.hidden_size());
        for (Vector* b : {&c.b_z, &c.b_r, &c.b_h}) fill(*b, c.hidden_size());
    };
    fill_cell(net.params.encoder);
    fill(net.params.latent.w, shape.encoder_hidden);
    fill(net.params.latent.b, shape.encoder_hidden);
    fill_cell(net.params.decoder);
    fill(net.params.output.w, shape.decoder_hidden);
    fill(net.params.output.b, shape.decoder_hidden);
    return net;
}

void TwinNetwork::validate() const {
    shape.validate();
    for (int ch = 0; ch < 2; ++ch) {
        if (!(normalizer.std[ch] > 0.0) || !std::isfinite(normalizer.mean[ch])) {
            throw ValidationError("normalizer std must be positive and mean finite");
        }
    }
    params.encoder.validate();
    params.decoder.validate();
    if (params.encoder.input_size() != 2 || params.encoder.hidden_size() != shape.encoder_hidden) {
        throw ValidationError("encoder does not match the network shape");
    }
    if (params.latent.w.rows() != shape.latent || params.latent.w.cols() != shape.encoder_hidden ||
        params.latent.b.size() != shape.latent) {
        throw ValidationError("latent layer does not match the network shape");
    }
    if (params.decoder.input_size() != shape.latent || params.decoder.hidden_size() != shape.decoder_hidden) {
        throw ValidationError("decoder does not match the network shape");
    }
    if (params.output.w.rows() != 1 || params.output.w.cols() != shape.decoder_hidden || params.output.b.size() != 1) {
        throw ValidationError("output layer must map the decoder state to exactly one value");
    }
    if (!params.latent.w.allFinite() || !params.latent.b.allFinite() || !params.output.w.allFinite() ||
        !params.output.b.allFinite()) {
        throw ValidationError("dense layers hold non-finite values");
    }
}

namespace {

struct ForwardTrace {
    std::vector<GruCache> encoder;
    Matrix h_enc;     // encoder final state
    Matrix a_latent;  // pre-activation
    Matrix latent;
    GruCache decoder;
    Matrix h_dec;
    Matrix y;  // 1 x B
};

/// Column b of each per-step input matrix holds sample b.
std::vector<Matrix> normalized_inputs(const TwinNetwork& net, std::span<const Sample> batch) {
    const int T = net.shape.window;
    const auto B = static_cast<Eigen::Index>(batch.size());
    std::vector<Matrix> xs(T, Matrix(2, B));
    for (Eigen::Index b = 0; b < B; ++b) {
        const HistoryWindow& w = batch[b].window;
        if (static_cast<int>(w.u.size()) != T || static_cast<int>(w.v.size()) != T) {
            throw ValidationError("window length " + std::to_string(w.u.size()) + " does not match network T = " +
                                  std::to_string(T));
        }
        for (int t = 0; t < T; ++t) {
            xs[t](0, b) = net.normalizer.normalize(0, w.u[t]);
            xs[t](1, b) = net.normalizer.normalize(1, w.v[t]);
        }
    }
    return xs;
}

ForwardTrace run_forward(const TwinNetwork& net, std::span<const Sample> batch, bool keep) {
    const auto& p = net.params;
    const auto B = static_cast<Eigen::Index>(batch.size());
    const std::vector<Matrix> xs = normalized_inputs(net, batch);
    ForwardTrace tr;
    Matrix h = Matrix::Zero(net.shape.encoder_hidden, B);
    if (keep) tr.encoder.resize(xs.size());
    for (std::size_t t = 0; t < xs.size(); ++t) h = gru_forward(p.encoder, xs[t], h, keep ? &tr.encoder[t] : nullptr);
    tr.a_latent = (p.latent.w * h).colwise() + p.latent.b;
    tr.latent = tr.a_latent.cwiseMax(0.0);
    tr.h_enc = std::move(h);
    const Matrix h0 = Matrix::Zero(net.shape.decoder_hidden, B);
    tr.h_dec = gru_forward(p.decoder, tr.latent, h0, keep ? &tr.decoder : nullptr);
    tr.y = (p.output.w * tr.h_dec).colwise() + p.output.b;
    return tr;
}

}  // namespace

double forward(const TwinNetwork& net, const HistoryWindow& window) {
    const Sample s{window, 0.0};
    return run_forward(net, std::span<const Sample>(&s, 1), false).y(0, 0);
}

std::vector<double> forward_batch(const TwinNetwork& net, std::span<const Sample> samples) {
    std::vector<double> out;
    out.reserve(samples.size());
    constexpr std::size_t kChunk = 512;
    for (std::size_t at = 0; at < samples.size(); at += kChunk) {
        const auto chunk = samples.subspan(at, std::min(kChunk, samples.size() - at));
        const Matrix y = run_forward(net, chunk, false).y;
        for (Eigen::Index i = 0; i < y.cols(); ++i) out.push_back(y(0, i));
    }
    return out;
}

double mse(const TwinNetwork& net, std::span<const Sample> samples) {
    if (samples.empty()) throw ValidationError("cannot evaluate MSE on an empty set");
    const std::vector<double> pred = forward_batch(net, samples);
    double sum = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double e = pred[i] - samples[i].target;
        sum += e * e;
    }
    return sum / static_cast<double>(samples.size());
}

LossAndGrad loss_and_grad(const TwinNetwork& net, std::span<const Sample> batch) {
    if (batch.empty()) throw ValidationError("loss_and_grad needs a non-empty batch");
    const auto& p = net.params;
    const auto B = static_cast<Eigen::Index>(batch.size());
    ForwardTrace tr = run_forward(net, batch, true);

    Eigen::RowVectorXd err(B);
    for (Eigen::Index b = 0; b < B; ++b) err(b) = tr.y(0, b) - batch[b].target;

    LossAndGrad out;
    out.loss = err.squaredNorm() / static_cast<double>(B);
    out.grad = TwinParams::zeros(net.shape);
    TwinParams& g = out.grad;

    const Matrix dy = err * (2.0 / static_cast<double>(B));  // 1 x B
    g.output.w.noalias() = dy * tr.h_dec.transpose();
    g.output.b(0) = dy.sum();
    const Matrix dh_dec = p.output.w.transpose() * dy;

    Matrix d_latent;
    gru_backward(p.decoder, tr.decoder, dh_dec, g.decoder, &d_latent);

    const Matrix da_latent = (d_latent.array() * (tr.a_latent.array() > 0.0).cast<double>()).matrix();
    g.latent.w.noalias() = da_latent * tr.h_enc.transpose();
    g.latent.b = da_latent.rowwise().sum();
    Matrix dh = p.latent.w.transpose() * da_latent;

    for (std::size_t t = tr.encoder.size(); t-- > 0;) dh = gru_backward(p.encoder, tr.encoder[t], dh, g.encoder, nullptr);
    return out;
}

}  // namespace viltwin::twin
