#pragma once

#include <span>
#include <vector>

#include "bellsim/analysis.hpp"
#include "bellsim/experiment.hpp"

namespace bellsim {

struct SweepRow {
    double threshold = 0.0;
    double success_probability = 0.0;
    double sigma_success_probability = 0.0;
    BellEstimate bell;
};

/// Rows ordered by threshold.
struct SweepResult {
    std::vector<SweepRow> rows;
};

/// One full CHSH run per threshold. Each threshold draws from its own
/// stream derived from cfg.seed. The detection model of `cfg` must be a
/// ThresholdConfig; only its threshold is replaced.
SweepResult threshold_sweep(const RunConfig &cfg, std::span<const double> thresholds);

/// `points` thresholds on one side of 0.5 whose success probabilities are
/// evenly spaced from `min_success` up to 1.
std::vector<double> default_sweep_thresholds(std::size_t points = 21, double min_success = 0.05,
                                             ThresholdSide side = ThresholdSide::low);

/// Inverts the 2/pi transfer of the measure-and-prepare chain: a no-postselection
/// visibility V on an axis needs correlation strength V pi / 2 there.
PairSource calibrate_source(double target_v_hv, double target_v_pm);

}  // namespace bellsim
