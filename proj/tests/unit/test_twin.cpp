#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "viltwin/core/error.hpp"
#include "viltwin/core/rng.hpp"
#include "viltwin/twin/dataset.hpp"
#include "viltwin/twin/gru.hpp"
#include "viltwin/twin/network.hpp"
#include "viltwin/twin/train.hpp"
#include "viltwin/twin/twin_model.hpp"
#include "viltwin/twin/weights_io.hpp"

using namespace viltwin;
using namespace viltwin::twin;

namespace {

double sig(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Scalar re-implementation of the whole network for 1-unit layers.
double scalar_net(const TwinNetwork& n, const HistoryWindow& w) {
    const auto& p = n.params;
    auto cell = [](const GruCellParams& c, double x0, double x1, int inputs, double h) {
        auto lin = [&](const Matrix& W, const Matrix& U, const Vector& b, double hh) {
            double a = W(0, 0) * x0 + U(0, 0) * hh + b(0);
            if (inputs == 2) a += W(0, 1) * x1;
            return a;
        };
        const double z = sig(lin(c.w_z, c.u_z, c.b_z, h));
        const double r = sig(lin(c.w_r, c.u_r, c.b_r, h));
        const double hc = std::tanh(lin(c.w_h, c.u_h, c.b_h, r * h));
        return (1 - z) * h + z * hc;
    };
    double h = 0.0;
    for (std::size_t t = 0; t < w.size(); ++t) {
        h = cell(p.encoder, n.normalizer.normalize(0, w.u[t]), n.normalizer.normalize(1, w.v[t]), 2, h);
    }
    const double lat = std::max(0.0, p.latent.w(0, 0) * h + p.latent.b(0));
    const double hd = cell(p.decoder, lat, 0.0, 1, 0.0);
    return p.output.w(0, 0) * hd + p.output.b(0);
}

HistoryWindow ramp_window(int T, double k) {
    HistoryWindow w = HistoryWindow::zeros(T);
    for (int i = 0; i < T; ++i) {
        w.u[i] = k * (1.0 + 0.1 * i);
        w.v[i] = k * 0.05 * i;
    }
    return w;
}

}  // namespace

TEST_CASE("gru cell") {
    SUBCASE("zero network keeps h = 0") {
        const auto p = GruCellParams::zeros(2, 3);
        CHECK(gru_cell(p, Vector::Ones(2), Vector::Zero(3)).isZero());
    }
    SUBCASE("scalar hand computation") {
        auto p = GruCellParams::zeros(1, 1);
        p.w_h(0, 0) = 1.0;
        Vector x(1), h(1);
        x << 1.0;
        h << 0.0;
        CHECK(gru_cell(p, x, h)(0) == doctest::Approx(0.38080).epsilon(1e-4));
    }
    SUBCASE("closed update gate") {
        auto p = GruCellParams::zeros(1, 1);
        p.b_z(0) = -50.0;
        p.w_h(0, 0) = 1.0;
        Vector x(1), h(1);
        x << 1.0;
        h << 0.7;
        CHECK(gru_cell(p, x, h)(0) == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("dimension mismatch") {
        const auto p = GruCellParams::zeros(2, 3);
        CHECK_THROWS_AS(gru_cell(p, Vector::Ones(3), Vector::Zero(3)), ValidationError);
    }
}

TEST_CASE("network forward") {
    SUBCASE("zero network") {
        const auto net = TwinNetwork::zeros({5, 3, 4, 3});
        CHECK(forward(net, ramp_window(5, 1.0)) == 0.0);
    }
    SUBCASE("tiny net against the scalar oracle") {
        const NetworkShape shape{4, 1, 1, 1};
        auto net = TwinNetwork::random(shape, 11);
        net.normalizer = {{0.5, 0.2}, {2.0, 1.5}};
        net.params.latent.b(0) = 0.3;
        const auto w = ramp_window(4, 1.3);
        CHECK(forward(net, w) == doctest::Approx(scalar_net(net, w)).epsilon(1e-12));
    }
    SUBCASE("window length is enforced") {
        const auto net = TwinNetwork::random({6, 2, 2, 2}, 1);
        CHECK_THROWS_AS(forward(net, HistoryWindow::zeros(5)), ValidationError);
        CHECK_NOTHROW(forward(net, HistoryWindow::zeros(6)));
    }
    SUBCASE("batch agrees with single") {
        const auto net = TwinNetwork::random({5, 3, 4, 3}, 2);
        std::vector<Sample> s;
        for (int i = 0; i < 7; ++i) s.push_back({ramp_window(5, 0.3 * i), 0.0});
        const auto b = forward_batch(net, s);
        for (int i = 0; i < 7; ++i) CHECK(b[i] == doctest::Approx(forward(net, s[i].window)).epsilon(1e-13));
    }
}

TEST_CASE("loss and gradient") {
    const NetworkShape shape{3, 2, 3, 2};
    auto net = TwinNetwork::random(shape, 5);
    std::vector<Sample> one{{ramp_window(3, 1.0), 0.4}};
    SUBCASE("prediction equal to target") {
        auto n0 = TwinNetwork::zeros(shape);
        std::vector<Sample> z{{ramp_window(3, 1.0), 0.0}};
        const auto lg = loss_and_grad(n0, z);
        CHECK(lg.loss == 0.0);
        for (double g : lg.grad.flatten()) CHECK(g == 0.0);
    }
    SUBCASE("output bias against finite differences") {
        const auto lg = loss_and_grad(net, one);
        auto plus = net, minus = net;
        plus.params.output.b(0) += 1e-5;
        minus.params.output.b(0) -= 1e-5;
        const double fd = (mse(plus, one) - mse(minus, one)) / 2e-5;
        CHECK(std::abs(lg.grad.output.b(0) - fd) / std::max({std::abs(fd), std::abs(lg.grad.output.b(0)), 1e-6}) < 1e-4);
    }
    SUBCASE("duplicated samples give the same gradient") {
        std::vector<Sample> two{one[0], one[0]};
        const auto a = loss_and_grad(net, one).grad.flatten();
        const auto b = loss_and_grad(net, two).grad.flatten();
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == doctest::Approx(b[i]).epsilon(1e-12));
    }
    SUBCASE("empty batch") {
        CHECK_THROWS_AS(loss_and_grad(net, std::vector<Sample>{}), ValidationError);
    }
    SUBCASE("flatten and assign are inverse") {
        auto flat = net.params.flatten();
        CHECK(flat.size() == net.params.parameter_count());
        TwinNetwork copy = TwinNetwork::zeros(shape);
        copy.params.assign(flat);
        CHECK(copy.params.flatten() == flat);
    }
}

TEST_CASE("augment and split") {
    SampleSet set;
    for (int i = 0; i < 10; ++i) set.samples.push_back({ramp_window(3, i + 1.0), 0.1 * i});
    SUBCASE("augment doubles with zero windows") {
        const auto a = augment_zeros(set);
        CHECK(a.size() == 20);
        int zeros = 0;
        for (const auto& s : a.samples) zeros += s.window == HistoryWindow::zeros(3) && s.target == 0.0;
        CHECK(zeros == 10);
        CHECK(augment_zeros(a).size() == 40);
        CHECK(augment_zeros(SampleSet{}).empty());
    }
    SUBCASE("split sizes") {
        SampleSet hundred;
        for (int i = 0; i < 100; ++i) hundred.samples.push_back({ramp_window(3, i), 1.0 * i});
        const auto s = split(hundred, {}, 1);
        CHECK(s.train.size() == 60);
        CHECK(s.val.size() == 20);
        CHECK(s.test.size() == 20);
        SampleSet five;
        five.samples.assign(hundred.samples.begin(), hundred.samples.begin() + 5);
        const auto f = split(five, {}, 1);
        CHECK(f.train.size() == 3);
        CHECK(f.val.size() == 1);
        CHECK(f.test.size() == 1);
        const auto again = split(hundred, {}, 1);
        CHECK(again.train.samples == s.train.samples);
        CHECK(again.test.samples == s.test.samples);
        five.samples.pop_back();
        CHECK_THROWS_AS(split(five, {}, 1), ValidationError);
        CHECK_THROWS_AS(split(hundred, {0.5, 0.2, 0.2}, 1), ValidationError);
    }
}

TEST_CASE("series csv") {
    SUBCASE("window count") {
        std::istringstream in("t,u,v\n0,1,0\n0.1,1,0.1\n0.2,1,0.2\n0.3,1,0.3\n0.4,1,0.4\n");
        const auto s = parse_series_csv(in);
        const auto set = windows_from_series(s, 3, Provenance::ingested);
        REQUIRE(set.size() == 2);
        CHECK(set.samples[0].target == 0.3);
        CHECK(set.samples[1].window.v == std::vector<double>{0.1, 0.2, 0.3});
        CHECK(set.provenance == Provenance::ingested);
    }
    SUBCASE("bad cell names its line") {
        std::istringstream in("t,u,v\n0,1,0\n0.1,abc,0.1\n");
        try {
            parse_series_csv(in);
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.line() == 3);
        }
    }
    SUBCASE("too short") {
        std::istringstream in("t,u,v\n0,1,0\n0.1,1,0.1\n");
        CHECK_THROWS_AS(windows_from_series(parse_series_csv(in), 3, Provenance::ingested), ValidationError);
    }
}

TEST_CASE("training") {
    SUBCASE("linear system is learned") {
        // v_T = 0.9 v_{T-1} + 0.1 u_{T-1}
        Xoshiro256 rng(3);
        SampleSet set;
        for (int i = 0; i < 600; ++i) {
            HistoryWindow w = HistoryWindow::zeros(4);
            for (int t = 0; t < 4; ++t) {
                w.u[t] = rng.uniform(0.0, 3.0);
                w.v[t] = rng.uniform(0.0, 3.0);
            }
            set.samples.push_back({w, 0.9 * w.v[3] + 0.1 * w.u[3]});
        }
        TrainConfig cfg;
        cfg.shape = {4, 8, 8, 8};
        cfg.epochs = 200;
        cfg.batch_size = 32;
        cfg.learning_rate = 3e-3;
        cfg.seed = 1;
        const auto res = train(set, cfg);
        CHECK(res.test_mse < 1e-3);
    }
    SampleSet set;
    for (int i = 0; i < 50; ++i) set.samples.push_back({ramp_window(3, 0.1 * i), 0.05 * i});
    TrainConfig cfg;
    cfg.shape = {3, 2, 2, 2};
    cfg.epochs = 3;
    cfg.batch_size = 8;
    SUBCASE("zero learning rate changes nothing") {
        cfg.learning_rate = 0.0;
        const auto res = train(set, cfg);
        const auto init = TwinNetwork::random(cfg.shape, cfg.seed);
        CHECK(res.network.params.flatten() == init.params.flatten());
        CHECK(res.epochs[0].val_mse == res.epochs[2].val_mse);
    }
    SUBCASE("seeded training repeats") {
        const auto a = train(set, cfg);
        const auto b = train(set, cfg);
        CHECK(a.network.params.flatten() == b.network.params.flatten());
        CHECK(a.test_mse == b.test_mse);
    }
}

TEST_CASE("twin step and baseline") {
    dynamics::KinematicParams kp;
    SUBCASE("zero net keeps the car at rest") {
        const auto net = TwinNetwork::zeros({5, 2, 2, 2});
        auto w = HistoryWindow::zeros(5);
        dynamics::VehicleState s{};
        for (int i = 0; i < 20; ++i) {
            const auto r = twin_step(net, w, s, 0.1, 0.0, 0.02, kp);
            s = r.state;
            w = r.window;
        }
        CHECK(s == dynamics::VehicleState{});
    }
    SUBCASE("window shifts in the newest pair") {
        const auto net = TwinNetwork::zeros({3, 2, 2, 2});
        const auto r = twin_step(net, HistoryWindow::zeros(3), {0, 0, 0, 1.5}, 0.0, 2.0, 0.02, kp);
        CHECK(r.window.u.back() == 2.0);
        CHECK(r.window.v.back() == 1.5);
        CHECK(r.state.x == doctest::Approx(0.03));
        CHECK(r.state.v == 0.0);
        CHECK_THROWS_AS(twin_step(net, HistoryWindow::zeros(2), {}, 0.0, 0.0, 0.02, kp), ValidationError);
    }
    SUBCASE("baseline is one pd step") {
        HistoryWindow w = HistoryWindow::zeros(3);
        w.u = {1.0, 1.0, 1.0};
        w.v = {0.5, 0.5, 0.5};
        const double want = 0.5 + 0.02 * dynamics::pd_accel(1.0, 0.5, {1.0, 0.5}, 0.02, kp).accel;
        CHECK(kinematic_baseline_predict(w, 0.02, kp) == doctest::Approx(want));
    }
}

TEST_CASE("weights round trip") {
    auto net = TwinNetwork::random({4, 3, 5, 2}, 21);
    net.normalizer = {{0.25, 1.0 / 3.0}, {1.5, 0.7}};
    const auto path = std::filesystem::temp_directory_path() / "viltwin_unit_weights.json";
    save_weights(net, path);
    const auto back = load_weights(path);
    CHECK(back.shape == net.shape);
    CHECK(back.normalizer == net.normalizer);
    CHECK(back.params.flatten() == net.params.flatten());
    auto doc = weights_to_json(net);
    doc["layers"].erase("decoder.u_h");
    CHECK_THROWS_AS(weights_from_json(doc), ValidationError);
}
