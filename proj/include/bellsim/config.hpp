#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bellsim/detection.hpp"
#include "bellsim/experiment.hpp"

namespace bellsim {

/// A fringe scan request: the A analyzer steps over [0, 180] degrees while B
/// stays at `beta_deg`.
struct ScanSpec {
    std::string label;
    double beta_deg = 0.0;
    std::size_t points = 13;
    std::uint64_t trials_per_point = 1000;
};

struct SweepSpec {
    std::size_t points = 21;
    double min_success_probability = 0.05;
    ThresholdSide side = ThresholdSide::low;
    /// Explicit grid; overrides points / min_success_probability when set.
    std::vector<double> thresholds;
};

struct ServiceSpec {
    std::string host = "127.0.0.1";
    int port = 8765;
    /// Minimum delay between trials offered to one session.
    double pacing_ms = 0.0;
};

/// A parsed run file. Either a simulation (`run`) or, when `counts_file`
/// is set, a reanalysis of recorded coincidence counts.
struct Config {
    std::string name;
    RunConfig run;
    std::optional<std::filesystem::path> counts_file;
    std::vector<ScanSpec> scans;
    SweepSpec sweep;
    ServiceSpec service;
};

/// Parses the JSON run-file format (comments allowed). Relative file paths
/// resolve against `base_dir`. Throws ParseError on malformed input and
/// InvalidArgument on out-of-range values.
Config parse_config(std::string_view text, const std::filesystem::path &base_dir = {});

Config load_config(const std::filesystem::path &path);

}  // namespace bellsim
