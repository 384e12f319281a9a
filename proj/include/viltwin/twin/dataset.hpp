#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "viltwin/core/sampling.hpp"
#include "viltwin/dynamics/kinematic.hpp"
#include "viltwin/twin/network.hpp"

namespace viltwin::twin {

enum class Provenance { synthetic, ingested };

struct SampleSet {
    std::vector<Sample> samples;
    Provenance provenance = Provenance::synthetic;

    std::size_t size() const noexcept { return samples.size(); }
    bool empty() const noexcept { return samples.empty(); }
};

/// A time-ordered (t, u, v) record, the on-disk dataset convention.
struct Series {
    std::vector<double> t;
    std::vector<double> u;
    std::vector<double> v;

    std::size_t size() const noexcept { return t.size(); }
};

/// Reads a CSV with header `t,u,v`. Throws ParseError naming the line for a
/// malformed row or a time going backwards, IoError if unreadable.
Series read_series_csv(const std::filesystem::path& path);
Series parse_series_csv(std::istream& in);
void write_series_csv(const Series& series, const std::filesystem::path& path);
void write_series_csv(const Series& series, std::ostream& out);

/// Stride-1 windows: rows i..i+T-1 predict v at row i+T.
/// Throws ValidationError with fewer than T + 1 rows.
SampleSet windows_from_series(const Series& series, int window, Provenance provenance);

/// read_series_csv followed by windows_from_series.
SampleSet ingest_csv(const std::filesystem::path& path, int window);

/// Parameters for the synthetic plant recording. The command is piecewise
/// constant; some holds land inside the dead zone and some are exactly zero.
struct SyntheticConfig {
    std::size_t samples = 50000;  ///< windows to produce
    int window = 20;
    SamplingConfig sampling{};
    dynamics::PlantParams plant{};
    double hold_min = 0.3;  ///< [s]
    double hold_max = 2.0;  ///< [s]
    double p_zero = 0.1;
    double p_low = 0.2;  ///< command drawn inside the dead zone
};

/// One continuous plant run with samples + window rows.
Series synthesize_series(const SyntheticConfig& config);

/// Appends one all-zero window with target 0 per existing sample.
SampleSet augment_zeros(const SampleSet& set);

struct SplitFractions {
    double train = 0.6;
    double val = 0.2;
    double test = 0.2;

    void validate() const;
};

struct Split {
    SampleSet train;
    SampleSet val;
    SampleSet test;
};

/// Seeded shuffle, then contiguous slices of round(n * train) and
/// round(n * val) samples; the test slice takes the rest.
/// Throws ValidationError for fewer than 5 samples.
Split split(const SampleSet& set, const SplitFractions& fractions, std::uint64_t seed);

}  // namespace viltwin::twin
