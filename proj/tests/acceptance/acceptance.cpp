// Acceptance run. Prints one PASS/FAIL line per criterion and exits non-zero
// when any fails. Pass criterion names (A1 A5 ...) to run a subset.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "viltwin/core/bag.hpp"
#include "viltwin/core/rng.hpp"
#include "viltwin/dynamics/kinematic.hpp"
#include "viltwin/safety/bounded_check.hpp"
#include "viltwin/safety/gr1_solver.hpp"
#include "viltwin/safety/gr1_spec.hpp"
#include "viltwin/safety/rule_filter.hpp"
#include "viltwin/sim/bridge_vehicle.hpp"
#include "viltwin/sim/compare.hpp"
#include "viltwin/sim/engine.hpp"
#include "viltwin/sim/scenario.hpp"
#include "viltwin/twin/dataset.hpp"
#include "viltwin/twin/network.hpp"
#include "viltwin/twin/train.hpp"
#include "viltwin/twin/twin_model.hpp"

using namespace viltwin;
using Clock = std::chrono::steady_clock;

namespace {

// Tolerances and budgets.
constexpr int kHeadingSteps = 100000;
constexpr double kCircleDrift = 0.05;       // of R
constexpr double kCircleStep = 0.01;        // dt v / R
constexpr int kGradNets = 50;
constexpr double kGradStep = 1e-5;
constexpr double kGradTol = 1e-4;
constexpr double kGradFloor = 1e-5;         // denominator floor: below it the check is absolute, 1e-9
constexpr double kTwinRatio = 0.5;          // twin MSE over baseline MSE
constexpr double kZeroWindow = 0.01;        // m/s
constexpr double kSweepStep = 0.01;         // m
constexpr double kContinuity = 1e-9;        // m/s jump allowed at a band edge
constexpr int kCheckHorizon = 10;
constexpr double kRunSeconds = 120.0;
constexpr std::uint64_t kRunSeed = 42;
constexpr double kPedClearance = 2.0;       // m
constexpr double kVehClearance = 1.0;       // m
constexpr double kBudgetA1 = 5.0, kBudgetA2 = 60.0, kBudgetA3 = 600.0, kBudgetA5 = 1.0, kBudgetA6 = 30.0,
                 kBudgetA7 = 60.0;

const std::filesystem::path kData = VILTWIN_DATA_DIR;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Shared between A3 and A4.
std::optional<twin::TwinNetwork> g_trained;

Outcome a1_kinematics() {
    const auto t0 = Clock::now();
    dynamics::KinematicParams p;
    Xoshiro256 rng(1);
    std::size_t inexact = 0;
    for (int i = 0; i < kHeadingSteps; ++i) {
        const dynamics::VehicleState s{rng.uniform(-50, 50), rng.uniform(-50, 50), rng.uniform(-10, 10),
                                       rng.uniform(0, p.v_max)};
        const double delta = rng.uniform(-p.delta_max, p.delta_max);
        const double dt = rng.uniform(0.001, 0.05);
        const auto n = dynamics::kinematic_step(s, delta, rng.uniform(-5, 5), dt, p);
        if (n.theta != s.theta + dt / p.wheelbase * s.v * std::tan(delta)) ++inexact;
    }
    double worst = 0.0;
    for (double delta : {0.05, 0.2, 0.4}) {
        const double v = 2.0;
        const double R = p.wheelbase / std::tan(delta);
        const double dt = kCircleStep * R / v;
        const Vec2 centre{0.0, R};
        dynamics::VehicleState s{0, 0, 0, v};
        const int steps = static_cast<int>(std::ceil(2 * std::numbers::pi / kCircleStep));
        for (int i = 0; i < steps; ++i) {
            s = dynamics::kinematic_step(s, delta, 0.0, dt, p);
            worst = std::max(worst, std::abs(distance({s.x, s.y}, centre) - R) / R);
        }
    }
    const double secs = seconds_since(t0);
    return {inexact == 0 && worst < kCircleDrift && secs < kBudgetA1,
            fmt("%zu inexact of %d heading steps, circle drift %.3g%% of R, %.2f s", inexact, kHeadingSteps,
                100 * worst, secs)};
}

Outcome a2_gradients() {
    const auto t0 = Clock::now();
    Xoshiro256 rng(2);
    double worst = 0.0, worst_a = 0.0, worst_fd = 0.0;
    std::size_t checked = 0;
    for (int k = 0; k < kGradNets; ++k) {
        const twin::NetworkShape shape{1 + static_cast<int>(rng() % 5), 1 + static_cast<int>(rng() % 4),
                                       1 + static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 4)};
        auto net = twin::TwinNetwork::random(shape, rng());
        net.normalizer = {{rng.uniform(0, 2), rng.uniform(0, 2)}, {rng.uniform(0.5, 2), rng.uniform(0.5, 2)}};
        std::vector<twin::Sample> batch;
        for (int b = 0, n = 1 + static_cast<int>(rng() % 3); b < n; ++b) {
            twin::Sample s{twin::HistoryWindow::zeros(shape.window), rng.uniform(0, 3)};
            for (int t = 0; t < shape.window; ++t) {
                s.window.u[t] = rng.uniform(0, 4);
                s.window.v[t] = rng.uniform(0, 4);
            }
            batch.push_back(s);
        }
        const auto analytic = twin::loss_and_grad(net, batch).grad.flatten();
        const auto theta = net.params.flatten();
        for (std::size_t i = 0; i < theta.size(); ++i) {
            auto plus = theta, minus = theta;
            plus[i] += kGradStep;
            minus[i] -= kGradStep;
            auto np = net, nm = net;
            np.params.assign(plus);
            nm.params.assign(minus);
            const double fd = (twin::mse(np, batch) - twin::mse(nm, batch)) / (2 * kGradStep);
            const double rel =
                std::abs(analytic[i] - fd) / std::max({std::abs(analytic[i]), std::abs(fd), kGradFloor});
            if (rel > worst) {
                worst = rel;
                worst_a = analytic[i];
                worst_fd = fd;
            }
            ++checked;
        }
    }
    const double secs = seconds_since(t0);
    return {worst < kGradTol && secs < kBudgetA2,
            fmt("%zu parameters over %d nets, worst relative error %.3g (analytic %.6g, numeric %.6g), %.2f s", checked,
                kGradNets, worst, worst_a, worst_fd, secs)};
}

double baseline_mse(const std::vector<twin::Sample>& samples, double dt) {
    const dynamics::KinematicParams params;
    double s = 0.0;
    for (const auto& x : samples) {
        const double e = twin::kinematic_baseline_predict(x.window, dt, params) - x.target;
        s += e * e;
    }
    return s / static_cast<double>(samples.size());
}

Outcome a3_twin() {
    const auto t0 = Clock::now();
    twin::SyntheticConfig syn;
    twin::TrainConfig cfg;
    cfg.seed = 3;
    syn.window = cfg.shape.window;
    syn.sampling.seed = cfg.seed;
    const auto set = twin::augment_zeros(
        twin::windows_from_series(twin::synthesize_series(syn), cfg.shape.window, twin::Provenance::synthetic));
    const auto parts = twin::split(set, cfg.fractions, cfg.seed);
    const auto res = twin::train(parts, cfg);
    g_trained = res.network;
    const double base = baseline_mse(parts.test.samples, syn.sampling.delta_nom);
    const double secs = seconds_since(t0);
    return {res.test_mse <= kTwinRatio * base && secs < kBudgetA3,
            fmt("%zu samples, twin test MSE %.3g vs baseline %.3g (ratio %.3f), best epoch %d, %.1f s", set.size(),
                res.test_mse, base, res.test_mse / base, res.best_epoch, secs)};
}

Outcome a4_zero_input() {
    if (!g_trained) return {false, "needs the network trained by A3"};
    const double y = twin::forward(*g_trained, twin::HistoryWindow::zeros(g_trained->shape.window));
    return {std::abs(y) < kZeroWindow, fmt("forward(zero window) = %.3g m/s", y)};
}

Outcome a5_rule_filter() {
    const auto t0 = Clock::now();
    safety::FilterConfig cfg;
    std::size_t bad_band = 0, non_monotone = 0;
    double edge_jump = 0.0;
    const int n = static_cast<int>(std::lround(30.0 / kSweepStep));
    for (double v_cmd : {0.5, 2.0, 4.0}) {
        double prev = 0.0;
        for (int i = 0; i <= n; ++i) {
            const double d = i * kSweepStep;
            const double u = safety::rule_filter(v_cmd, d, cfg);
            const double want = d <= cfg.d_emr   ? 0.0
                                : d <= cfg.d_det ? v_cmd * (d - cfg.d_emr) / (cfg.d_det - cfg.d_emr)
                                                 : v_cmd;
            if (std::abs(u - want) > 1e-12) ++bad_band;
            if (i > 0 && u < prev) ++non_monotone;
            prev = u;
        }
        for (double edge : {cfg.d_emr, cfg.d_det}) {
            const double below = safety::rule_filter(v_cmd, std::nextafter(edge, 0.0), cfg);
            const double at = safety::rule_filter(v_cmd, edge, cfg);
            const double above = safety::rule_filter(v_cmd, std::nextafter(edge, 100.0), cfg);
            edge_jump = std::max({edge_jump, std::abs(at - below), std::abs(above - at)});
        }
    }
    const double secs = seconds_since(t0);
    return {bad_band == 0 && non_monotone == 0 && edge_jump < kContinuity && secs < kBudgetA5,
            fmt("%zu band errors, %zu monotonicity breaks, largest edge jump %.3g m/s, %.3f s", bad_band,
                non_monotone, edge_jump, secs)};
}

Outcome a6_gr1() {
    const auto t0 = Clock::now();
    const auto spec = safety::build_paper_spec();
    const auto solved = safety::solve_gr1(spec);
    if (!solved.realizable) return {false, "paper spec unrealizable: " + solved.reason};
    const auto rep = safety::bounded_check(*solved.strategy, spec, kCheckHorizon);

    using safety::DriveState;
    safety::DriveShield shield(*solved.strategy, DriveState::STP);
    DriveState prev = DriveState::STP;
    std::size_t wrong = 0, stp_to_dcl = 0;
    for (int k = 0; k < 50; ++k) {
        safety::EnvFlags f;
        f.wrn = k >= 10 && k <= 20;
        f.urg = k >= 30 && k <= 40;
        const DriveState next = shield.step(f).state;
        if (f.wrn && !f.urg && prev != DriveState::STP && next != DriveState::DCL) ++wrong;
        if (f.urg && !f.wrn && next != DriveState::STP) ++wrong;
        if (!f.urg && !f.wrn && next != DriveState::MOV) ++wrong;
        if (prev == DriveState::STP && next == DriveState::DCL) ++stp_to_dcl;
        prev = next;
    }
    const double secs = seconds_since(t0);
    return {rep.ok() && wrong == 0 && stp_to_dcl == 0 && secs < kBudgetA6,
            fmt("realizable, horizon %d check %s over %zu words, 50-step schedule: %zu wrong responses, %zu STP->DCL, "
                "%.2f s",
                kCheckHorizon, rep.ok() ? "clean" : "VIOLATED", rep.words, wrong, stp_to_dcl, secs)};
}

bool compliant(const sim::RunMetrics& m, std::string& why) {
    bool ok = m.red_light_violations == 0 && m.min_pedestrian_clearance > kPedClearance &&
              m.min_vehicle_clearance > kVehClearance;
    std::string laps;
    for (const auto& v : m.vehicles) {
        ok = ok && v.laps >= 1;
        laps += fmt(" v%d:%d", v.id, v.laps);
    }
    why = fmt("red-light violations %zu, compliance failures %zu, min pedestrian %.2f m, min vehicle %.2f m, laps",
              static_cast<std::size_t>(m.red_light_violations), static_cast<std::size_t>(m.compliance_failures),
              m.min_pedestrian_clearance, m.min_vehicle_clearance) +
          laps;
    return ok;
}

Outcome a7_benchmark() {
    const auto t0 = Clock::now();
    const auto sc = sim::load_scenario(kData / "benchmark.scn");
    bool mix = false;
    for (const auto& v : sc.vehicles) mix = mix || v.model == sim::ModelKind::twin;
    sim::EngineOptions opt;
    opt.duration = kRunSeconds;
    opt.seed = kRunSeed;
    const auto res = sim::engine_run(sc, opt);
    std::string why;
    const bool ok = compliant(res.metrics, why);
    const double secs = seconds_since(t0);
    return {ok && mix && secs < kBudgetA7, why + (mix ? "" : ", no twin vehicle") + fmt(", %.1f s", secs)};
}

Outcome a8_replay() {
    const auto sc = sim::load_scenario(kData / "benchmark.scn");
    sim::EngineOptions opt;
    opt.duration = 30.0;
    opt.seed = kRunSeed;
    const auto tmp = std::filesystem::temp_directory_path();
    opt.bag_path = tmp / "viltwin_accept_a.bag";
    const auto a = sim::engine_run(sc, opt);
    opt.bag_path = tmp / "viltwin_accept_b.bag";
    const auto b = sim::engine_run(sc, opt);
    auto slurp = [](const std::filesystem::path& p) {
        std::ifstream in(p, std::ios::binary);
        return std::string(std::istreambuf_iterator<char>(in), {});
    };
    const std::string fa = slurp(tmp / "viltwin_accept_a.bag");
    const bool same = !fa.empty() && fa == slurp(tmp / "viltwin_accept_b.bag") && fa == bag_to_string(a.bag);

    // Replay: every CSV row must equal a pose in the bag, in order, with the speed of the twist at that time.
    std::ostringstream csv;
    sim::write_trace_csv(csv, bag_read(tmp / "viltwin_accept_a.bag"));
    std::istringstream in(csv.str());
    std::string line;
    std::getline(in, line);
    std::size_t rows = 0, mismatched = 0;
    std::vector<const Message*> poses;
    for (const auto& m : a.bag.messages) {
        if (m.kind() == MessageKind::pose) poses.push_back(&m);
    }
    while (std::getline(in, line)) {
        double t, x, y, th, v;
        int id;
        if (std::sscanf(line.c_str(), "%lf,%d,%lf,%lf,%lf,%lf", &t, &id, &x, &y, &th, &v) != 6 || rows >= poses.size()) {
            ++mismatched;
            ++rows;
            continue;
        }
        const auto& p = std::get<PoseMsg>(poses[rows]->payload);
        double want_v = NAN;
        for (const auto& m : a.bag.messages) {
            if (m.t == poses[rows]->t && m.kind() == MessageKind::twist && std::get<TwistMsg>(m.payload).id == id) {
                want_v = std::get<TwistMsg>(m.payload).v;
            }
        }
        if (t != poses[rows]->t || id != p.id || x != p.x || y != p.y || th != p.theta || v != want_v) ++mismatched;
        ++rows;
    }
    std::filesystem::remove(tmp / "viltwin_accept_a.bag");
    std::filesystem::remove(tmp / "viltwin_accept_b.bag");
    return {same && rows == poses.size() && mismatched == 0,
            fmt("bags %s (%zu bytes), replay %zu rows for %zu poses, %zu mismatched", same ? "identical" : "DIFFER",
                fa.size(), rows, poses.size(), mismatched)};
}

sim::Scenario bridge_scenario() {
    auto sc = sim::load_scenario(kData / "benchmark.scn");
    for (auto& v : sc.vehicles) {
        if (v.model == sim::ModelKind::kinematic) {
            v.model = sim::ModelKind::bridge;
            break;
        }
    }
    return sc;
}

const sim::VehicleSpec& bridged(const sim::Scenario& sc) {
    return *std::find_if(sc.vehicles.begin(), sc.vehicles.end(),
                         [](const sim::VehicleSpec& v) { return v.model == sim::ModelKind::bridge; });
}

Outcome a9_bridge() {
    const auto sc = bridge_scenario();
    const auto& bv = bridged(sc);
    sim::BridgeVehicleConfig vc;
    vc.id = bv.id;
    vc.initial = sim::initial_state(sc, bv);
    vc.params = bv.params;

    // Full run with an external client.
    std::thread client;
    sim::EngineOptions opt;
    opt.duration = kRunSeconds;
    opt.seed = kRunSeed;
    opt.on_bridge_ready = [&](std::uint16_t port) {
        client = std::thread([vc, port] { sim::run_bridge_vehicle("127.0.0.1", port, vc); });
    };
    std::string why;
    bool ok = false;
    try {
        const auto res = sim::engine_run(sc, opt);
        ok = compliant(res.metrics, why);
    } catch (const std::exception& e) {
        why = std::string("full run failed: ") + e.what();
    }
    if (client.joinable()) client.join();

    // Client hangs up part way through.
    const auto bag_path = std::filesystem::temp_directory_path() / "viltwin_accept_partial.bag";
    auto cut = vc;
    cut.stop_after = 500;
    opt.bag_path = bag_path;
    opt.bridge_timeout = std::chrono::milliseconds(1000);
    opt.on_bridge_ready = [&](std::uint16_t port) {
        client = std::thread([cut, port] { sim::run_bridge_vehicle("127.0.0.1", port, cut); });
    };
    bool aborted = false, partial_ok = false;
    std::string diag;
    try {
        sim::engine_run(sc, opt);
    } catch (const sim::RunAborted& e) {
        aborted = true;
        diag = e.what();
        try {
            const Bag on_disk = bag_read(bag_path);
            partial_ok = !on_disk.messages.empty() && on_disk.messages == e.partial().messages;
        } catch (const std::exception& r) {
            diag += std::string("; partial bag unreadable: ") + r.what();
        }
    }
    if (client.joinable()) client.join();
    std::filesystem::remove(bag_path);
    return {ok && aborted && partial_ok && !diag.empty(),
            why + fmt("; disconnect %s, partial bag %s", aborted ? "aborted the run" : "did NOT abort",
                      partial_ok ? "valid" : "INVALID") +
                (diag.empty() ? "" : " (" + diag + ")")};
}

Outcome a10_equivalence() {
    const auto solved = safety::solve_gr1(safety::build_paper_spec());
    if (!solved.strategy) return {false, "paper spec unrealizable"};
    const safety::FilterConfig cfg;
    std::size_t mismatches = 0, uncovered = 0, samples = 0;
    for (double v_cmd : {0.5, 2.0, 4.0}) {
        const auto rep = safety::equivalence_scan(*solved.strategy, cfg, v_cmd);
        mismatches += rep.mismatches;
        uncovered += rep.uncovered;
        samples += rep.samples;
    }
    return {mismatches == 0 && uncovered == 0,
            fmt("%zu distances swept, %zu mismatches, %zu uncovered", samples, mismatches, uncovered)};
}

}  // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"A1", a1_kinematics}, {"A2", a2_gradients},   {"A3", a3_twin},   {"A4", a4_zero_input},
        {"A5", a5_rule_filter}, {"A6", a6_gr1},        {"A7", a7_benchmark}, {"A8", a8_replay},
        {"A9", a9_bridge},     {"A10", a10_equivalence}};
    std::set<std::string> wanted(argv + 1, argv + argc);
    if (wanted.count("A4")) wanted.insert("A3");
    int failed = 0;
    for (const auto& [name, fn] : criteria) {
        if (!wanted.empty() && !wanted.count(name)) continue;
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%-3s %s  %s\n", name.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    return failed == 0 ? 0 : 1;
}
