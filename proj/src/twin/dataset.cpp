#include "viltwin/twin/dataset.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "viltwin/core/error.hpp"
#include "viltwin/core/rng.hpp"

namespace viltwin::twin {

namespace {

std::string trim(std::string s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

double parse_cell(const std::string& cell, std::size_t line) {
    const std::string c = trim(cell);
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), value);
    if (c.empty() || ec != std::errc{} || ptr != c.data() + c.size() || !std::isfinite(value)) {
        throw ParseError(line, "not a finite number: '" + c + "'");
    }
    return value;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

}  // namespace

Series parse_series_csv(std::istream& in) {
    Series s;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        if (!header) {
            std::string h;
            for (char c : line) {
                if (c != ' ' && c != '\t' && c != '\r') h.push_back(c);
            }
            if (h != "t,u,v") throw ParseError(lineno, "expected header 't,u,v'");
            header = true;
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (cells.size() != 3) throw ParseError(lineno, "expected 3 columns, found " + std::to_string(cells.size()));
        const double t = parse_cell(cells[0], lineno);
        if (!s.t.empty() && t < s.t.back()) throw ParseError(lineno, "time goes backwards");
        s.t.push_back(t);
        s.u.push_back(parse_cell(cells[1], lineno));
        s.v.push_back(parse_cell(cells[2], lineno));
    }
    if (!header) throw ParseError(lineno == 0 ? 1 : lineno, "missing header 't,u,v'");
    return s;
}

Series read_series_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset " + path.string());
    return parse_series_csv(in);
}

void write_series_csv(const Series& series, std::ostream& out) {
    out << "t,u,v\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        out << fmt(series.t[i]) << ',' << fmt(series.u[i]) << ',' << fmt(series.v[i]) << '\n';
    }
}

void write_series_csv(const Series& series, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write dataset " + path.string());
    write_series_csv(series, out);
    if (!out) throw IoError("write failed for " + path.string());
}

SampleSet windows_from_series(const Series& series, int window, Provenance provenance) {
    if (window < 1) throw ValidationError("window length must be at least 1");
    const auto T = static_cast<std::size_t>(window);
    if (series.size() < T + 1) {
        throw ValidationError("need at least " + std::to_string(T + 1) + " rows for window " + std::to_string(T) +
                              ", got " + std::to_string(series.size()));
    }
    SampleSet set;
    set.provenance = provenance;
    set.samples.reserve(series.size() - T);
    for (std::size_t i = 0; i + T < series.size(); ++i) {
        Sample s;
        s.window.u.assign(series.u.begin() + i, series.u.begin() + i + T);
        s.window.v.assign(series.v.begin() + i, series.v.begin() + i + T);
        s.target = series.v[i + T];
        set.samples.push_back(std::move(s));
    }
    return set;
}

SampleSet ingest_csv(const std::filesystem::path& path, int window) {
    return windows_from_series(read_series_csv(path), window, Provenance::ingested);
}

Series synthesize_series(const SyntheticConfig& cfg) {
    cfg.plant.validate();
    if (cfg.window < 1) throw ValidationError("window length must be at least 1");
    if (!(cfg.hold_min > 0.0) || cfg.hold_max < cfg.hold_min) throw ValidationError("bad command hold range");
    SamplingProcess process(cfg.sampling);
    // Separate stream for commands so changing the dt process leaves them intact.
    Xoshiro256 rng(cfg.sampling.seed ^ 0x5eed5eed5eed5eedULL);
    const double v_max = cfg.plant.kinematic.v_max;

    const std::size_t rows = cfg.samples + static_cast<std::size_t>(cfg.window);
    Series s;
    s.t.reserve(rows);
    s.u.reserve(rows);
    s.v.reserve(rows);
    dynamics::VehicleState state;
    double t = 0.0;
    double u = 0.0;
    double hold_left = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        if (hold_left <= 0.0) {
            const double pick = rng.uniform();
            if (pick < cfg.p_zero) {
                u = 0.0;
            } else if (pick < cfg.p_zero + cfg.p_low) {
                u = rng.uniform(0.0, cfg.plant.dead_zone);
            } else {
                u = rng.uniform(cfg.plant.dead_zone, v_max);
            }
            hold_left = rng.uniform(cfg.hold_min, cfg.hold_max);
        }
        s.t.push_back(t);
        s.u.push_back(u);
        s.v.push_back(state.v);
        const double dt = process.sample();
        state = dynamics::synth_plant_step(state, 0.0, u, dt, cfg.plant);
        t += dt;
        hold_left -= dt;
    }
    return s;
}

SampleSet augment_zeros(const SampleSet& set) {
    SampleSet out = set;
    out.samples.reserve(2 * set.size());
    for (const auto& s : set.samples) out.samples.push_back(Sample{HistoryWindow::zeros(s.window.size()), 0.0});
    return out;
}

void SplitFractions::validate() const {
    if (!(train > 0.0) || !(val > 0.0) || !(test > 0.0)) throw ValidationError("split fractions must be positive");
    if (std::abs(train + val + test - 1.0) > 1e-9) throw ValidationError("split fractions must sum to 1");
}

Split split(const SampleSet& set, const SplitFractions& fractions, std::uint64_t seed) {
    fractions.validate();
    const std::size_t n = set.size();
    if (n < 5) throw ValidationError("need at least 5 samples to split, got " + std::to_string(n));
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Xoshiro256 rng(seed);
    seeded_shuffle(order, rng);

    const auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions.train));
    const auto n_val = static_cast<std::size_t>(std::llround(static_cast<double>(n) * fractions.val));
    if (n_train + n_val >= n) throw ValidationError("split leaves no test samples");

    Split out;
    for (SampleSet* part : {&out.train, &out.val, &out.test}) part->provenance = set.provenance;
    for (std::size_t i = 0; i < n; ++i) {
        SampleSet& part = i < n_train ? out.train : (i < n_train + n_val ? out.val : out.test);
        part.samples.push_back(set.samples[order[i]]);
    }
    return out;
}

}  // namespace viltwin::twin
