// viltwin command-line front end.
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "viltwin/core/bag.hpp"
#include "viltwin/core/error.hpp"
#include "viltwin/safety/bounded_check.hpp"
#include "viltwin/safety/gr1_solver.hpp"
#include "viltwin/sim/bridge_vehicle.hpp"
#include "viltwin/sim/compare.hpp"
#include "viltwin/sim/engine.hpp"
#include "viltwin/sim/scenario.hpp"
#include "viltwin/twin/dataset.hpp"
#include "viltwin/twin/train.hpp"
#include "viltwin/twin/twin_model.hpp"
#include "viltwin/twin/weights_io.hpp"

namespace {

using namespace viltwin;
using nlohmann::json;

std::uint64_t effective_seed(std::uint64_t flag) {
    if (const char* env = std::getenv("VILTWIN_SEED"); env && *env) {
        try {
            std::size_t used = 0;
            const auto v = std::stoull(env, &used);
            if (used == std::string(env).size()) return v;
        } catch (const std::exception&) {
        }
        throw ValidationError(std::string("VILTWIN_SEED is not an unsigned integer: ") + env);
    }
    return flag;
}

safety::Gr1Spec spec_from_arg(const std::string& arg) {
    return arg == "paper" ? safety::build_paper_spec() : safety::load_spec(arg);
}

struct TrainFile {
    twin::TrainConfig train;
    twin::SyntheticConfig synthetic;
    bool augment = true;
};

TrainFile read_train_config(const std::string& path) {
    TrainFile c;
    if (path.empty()) return c;
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config " + path);
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    if (!j.is_object()) throw ValidationError(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        auto need_num = [&] {
            if (!v.is_number()) throw ValidationError(path + ": " + k + " must be a number");
        };
        auto need_int = [&] {
            if (!v.is_number_integer()) throw ValidationError(path + ": " + k + " must be an integer");
        };
        if (k == "epochs") {
            need_int();
            c.train.epochs = v.get<int>();
        } else if (k == "batch_size") {
            need_int();
            c.train.batch_size = v.get<int>();
        } else if (k == "learning_rate") {
            need_num();
            c.train.learning_rate = v.get<double>();
        } else if (k == "seed") {
            need_int();
            c.train.seed = v.get<std::uint64_t>();
        } else if (k == "patience") {
            need_int();
            c.train.patience = v.get<int>();
        } else if (k == "window") {
            need_int();
            c.train.shape.window = v.get<int>();
        } else if (k == "encoder_hidden") {
            need_int();
            c.train.shape.encoder_hidden = v.get<int>();
        } else if (k == "latent") {
            need_int();
            c.train.shape.latent = v.get<int>();
        } else if (k == "decoder_hidden") {
            need_int();
            c.train.shape.decoder_hidden = v.get<int>();
        } else if (k == "split") {
            if (!v.is_array() || v.size() != 3) throw ValidationError(path + ": split must be [train, val, test]");
            c.train.fractions = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
        } else if (k == "samples") {
            need_int();
            c.synthetic.samples = v.get<std::size_t>();
        } else if (k == "augment") {
            if (!v.is_boolean()) throw ValidationError(path + ": augment must be true or false");
            c.augment = v.get<bool>();
        } else {
            throw ValidationError(path + ": unknown field " + k);
        }
    }
    return c;
}

double baseline_mse(const std::vector<twin::Sample>& samples, double dt) {
    const dynamics::KinematicParams params;
    double s = 0.0;
    for (const auto& x : samples) {
        const double e = twin::kinematic_baseline_predict(x.window, dt, params) - x.target;
        s += e * e;
    }
    return samples.empty() ? 0.0 : s / static_cast<double>(samples.size());
}

int cmd_run(const std::string& scenario, double duration, std::uint64_t seed, const std::string& out,
            const std::string& metrics_out, std::optional<int> port) {
    const auto sc = sim::load_scenario(scenario);
    sim::EngineOptions opt;
    opt.duration = duration;
    opt.seed = effective_seed(seed);
    if (!out.empty()) opt.bag_path = out;
    if (port) opt.bridge_port = static_cast<std::uint16_t>(*port);
    opt.on_bridge_ready = [](std::uint16_t p) { std::fprintf(stderr, "bridge listening on 127.0.0.1:%u\n", p); };
    try {
        const auto res = sim::engine_run(sc, opt);
        const json m = sim::metrics_to_json(res.metrics);
        if (!metrics_out.empty()) {
            std::ofstream f(metrics_out);
            if (!f) throw IoError("cannot write " + metrics_out);
            f << m.dump(2) << '\n';
        }
        std::cout << m.dump(2) << '\n';
    } catch (const sim::RunAborted& e) {
        std::cerr << "run aborted: " << e.what() << " (" << e.partial().messages.size() << " messages recorded)\n";
        return 2;
    }
    return 0;
}

int cmd_replay(const std::string& bag_path, const std::string& out) {
    const Bag bag = bag_read(bag_path);
    if (out.empty()) {
        sim::write_trace_csv(std::cout, bag);
        return 0;
    }
    std::ofstream f(out);
    if (!f) throw IoError("cannot write " + out);
    sim::write_trace_csv(f, bag);
    return 0;
}

int cmd_train(const std::string& data, const std::string& config, const std::string& out, std::optional<int> epochs,
              std::optional<std::uint64_t> seed) {
    TrainFile cfg = read_train_config(config);
    if (epochs) cfg.train.epochs = *epochs;
    if (seed) cfg.train.seed = *seed;
    cfg.train.seed = effective_seed(cfg.train.seed);
    cfg.train.validate();
    twin::SampleSet set;
    double dt = cfg.synthetic.sampling.delta_nom;
    if (data == "synthetic") {
        cfg.synthetic.window = cfg.train.shape.window;
        cfg.synthetic.sampling.seed = cfg.train.seed;
        set = twin::windows_from_series(twin::synthesize_series(cfg.synthetic), cfg.train.shape.window,
                                        twin::Provenance::synthetic);
    } else {
        const auto series = twin::read_series_csv(data);
        set = twin::windows_from_series(series, cfg.train.shape.window, twin::Provenance::ingested);
        if (series.size() > 1) dt = (series.t.back() - series.t.front()) / static_cast<double>(series.size() - 1);
    }
    if (cfg.augment) set = twin::augment_zeros(set);
    const auto parts = twin::split(set, cfg.train.fractions, cfg.train.seed);
    const auto res = twin::train(parts, cfg.train, [](const twin::EpochMetrics& m) {
        std::fprintf(stderr, "epoch %d train %.6g val %.6g\n", m.epoch, m.train_mse, m.val_mse);
    });
    twin::save_weights(res.network, out);
    const double zero = twin::forward(res.network, twin::HistoryWindow::zeros(cfg.train.shape.window));
    std::printf("samples %zu\nbest_epoch %d\ntest_mse %.6g\nbaseline_mse %.6g\nzero_window %.6g\n", set.size(),
                res.best_epoch, res.test_mse, baseline_mse(parts.test.samples, dt), zero);
    return 0;
}

int cmd_synthesize(const std::string& spec_arg, const std::string& out, const std::string& spec_out) {
    const auto spec = spec_from_arg(spec_arg);
    if (!spec_out.empty()) safety::save_spec(spec, spec_out);
    const auto res = safety::solve_gr1(spec);
    if (!res.realizable) {
        std::cout << "Unrealizable: " << res.reason << '\n';
        return 1;
    }
    if (!out.empty()) safety::save_strategy(*res.strategy, out);
    std::cout << "Realizable (" << res.winning_positions << " winning positions, "
              << res.strategy->defined_transitions() << " transitions)\n";
    return 0;
}

void print_violation(const char* label, const safety::Violation& v, const safety::Gr1Spec& spec) {
    const safety::CompiledSpec cs(spec);
    std::cout << label << " violation (" << safety::to_string(v.kind) << ") at step " << v.step << ": " << v.message;
    if (!v.constraint.empty()) std::cout << " [" << v.constraint << "]";
    std::cout << '\n';
    for (std::size_t i = 0; i < v.trace.size(); ++i) {
        std::cout << "  " << i << (v.kind == safety::Violation::Kind::justice && i == v.loop_start ? " loop> " : "  ")
                  << cs.describe(v.trace[i].env, v.trace[i].sys) << " goal " << v.trace[i].goal << '\n';
    }
}

int cmd_check(const std::string& strategy_path, const std::string& spec_arg, int horizon) {
    const auto strategy = safety::load_strategy(strategy_path);
    const auto spec = spec_arg.empty() ? strategy.spec() : spec_from_arg(spec_arg);
    const auto rep = safety::bounded_check(strategy, spec, horizon);
    if (rep.ok()) {
        std::cout << "OK: no violations over " << rep.words << " environment words of length " << horizon << '\n';
        return 0;
    }
    if (rep.safety) print_violation("safety", *rep.safety, spec);
    if (rep.justice) print_violation("justice", *rep.justice, spec);
    return 1;
}

int cmd_compare(const std::string& a, const std::string& b, int vehicle, double grid) {
    const auto e = sim::compare_models(bag_read(a), bag_read(b), vehicle, grid);
    std::cout << json{{"position_rmse", e.position_rmse}, {"velocity_mse", e.velocity_mse}, {"samples", e.samples}}.dump(2)
              << '\n';
    return 0;
}

int cmd_drive(const std::string& host, int port, const std::string& scenario, int vehicle, int timeout_ms) {
    const auto sc = sim::load_scenario(scenario);
    const sim::VehicleSpec* spec = nullptr;
    for (const auto& v : sc.vehicles) {
        if (v.id == vehicle) spec = &v;
    }
    if (!spec) throw ValidationError("scenario has no vehicle " + std::to_string(vehicle));
    sim::BridgeVehicleConfig cfg;
    cfg.id = vehicle;
    cfg.initial = sim::initial_state(sc, *spec);
    cfg.params = spec->params;
    cfg.timeout = std::chrono::milliseconds(timeout_ms);
    const auto rep = sim::run_bridge_vehicle(host, static_cast<std::uint16_t>(port), cfg);
    std::cout << "answered " << rep.commands << " commands" << (rep.server_closed ? ", server closed" : "") << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Vehicle-in-the-loop simulator with learned twins and GR(1) shields"};
    app.require_subcommand(1);

    std::string scenario, out, metrics_out;
    double duration = 120.0;
    std::uint64_t seed = 0;
    std::optional<int> port;
    auto* run = app.add_subcommand("run", "Run a scenario and record a bag");
    run->add_option("scenario", scenario, "Scenario file")->required();
    run->add_option("--duration", duration, "Simulated seconds")->check(CLI::NonNegativeNumber);
    run->add_option("--seed", seed, "Seed (VILTWIN_SEED overrides)");
    run->add_option("--out", out, "Bag file");
    run->add_option("--metrics", metrics_out, "Write metrics JSON here too");
    run->add_option("--bridge-port", port, "Open the TCP bridge on this port");

    std::string bag_in;
    auto* replay = app.add_subcommand("replay", "Export the poses of a bag as CSV");
    replay->add_option("bag", bag_in, "Bag file")->required();
    replay->add_option("--out", out, "CSV file (default stdout)");

    std::string data = "synthetic", config;
    std::optional<int> epochs;
    std::optional<std::uint64_t> train_seed;
    auto* train = app.add_subcommand("train", "Train a velocity twin");
    train->add_option("--data", data, "'synthetic' or a t,u,v CSV");
    train->add_option("--config", config, "Training config JSON");
    train->add_option("--out", out, "Weights file")->required();
    train->add_option("--epochs", epochs, "Override the epoch count");
    train->add_option("--seed", train_seed, "Override the seed (VILTWIN_SEED overrides)");

    std::string spec_arg = "paper", spec_out;
    auto* synth = app.add_subcommand("synthesize", "Solve a GR(1) spec");
    synth->add_option("--spec", spec_arg, "'paper' or a spec file");
    synth->add_option("--out", out, "Strategy file");
    synth->add_option("--save-spec", spec_out, "Also write the spec file");

    std::string strategy_path, check_spec;
    int horizon = 10;
    auto* check = app.add_subcommand("check", "Bounded check of a strategy against a spec");
    check->add_option("--strategy", strategy_path, "Strategy file")->required();
    check->add_option("--spec", check_spec, "'paper' or a spec file (default: the strategy's own)");
    check->add_option("--horizon", horizon, "Word length")->check(CLI::Range(1, safety::kMaxCheckHorizon));

    std::string bag_a, bag_b;
    int vehicle = 0;
    double grid = 0.01;
    auto* compare = app.add_subcommand("compare", "Compare one vehicle across two bags");
    compare->add_option("bag_a", bag_a)->required();
    compare->add_option("bag_b", bag_b)->required();
    compare->add_option("--vehicle", vehicle, "Vehicle id")->required();
    compare->add_option("--grid", grid, "Resampling step [s]")->check(CLI::PositiveNumber);

    std::string host = "127.0.0.1";
    int drive_port = 0, timeout_ms = 10000;
    auto* drive = app.add_subcommand("drive", "Drive one vehicle of a scenario over the bridge");
    drive->add_option("--host", host, "Bridge host");
    drive->add_option("--port", drive_port, "Bridge port")->required();
    drive->add_option("--scenario", scenario, "Scenario file")->required();
    drive->add_option("--vehicle", vehicle, "Vehicle id")->required();
    drive->add_option("--timeout-ms", timeout_ms, "Give up after this long without a command");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return 1;
    }

    try {
        if (*run) return cmd_run(scenario, duration, seed, out, metrics_out, port);
        if (*replay) return cmd_replay(bag_in, out);
        if (*train) return cmd_train(data, config, out, epochs, train_seed);
        if (*synth) return cmd_synthesize(spec_arg, out, spec_out);
        if (*check) return cmd_check(strategy_path, check_spec, horizon);
        if (*compare) return cmd_compare(bag_a, bag_b, vehicle, grid);
        if (*drive) return cmd_drive(host, drive_port, scenario, vehicle, timeout_ms);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
