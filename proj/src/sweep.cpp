#include "bellsim/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "bellsim/error.hpp"
#include "bellsim/random.hpp"

namespace bellsim {

namespace {
constexpr std::uint64_t kSweepStream = 0x7377;  // "sw"
}

SweepResult threshold_sweep(const RunConfig &cfg, std::span<const double> thresholds) {
    if (thresholds.empty()) {
        throw InvalidArgument("threshold sweep needs at least one threshold");
    }
    const auto *base_detection = std::get_if<ThresholdConfig>(&cfg.detection);
    if (base_detection == nullptr) {
        throw InvalidArgument("threshold sweep needs a threshold detection model");
    }
    for (double t : thresholds) {
        if (!(t > 0.0) || !std::isfinite(t)) {
            throw InvalidArgument("sweep thresholds must be finite and positive");
        }
    }

    // Seeds are tied to each threshold's position in the caller's list, so
    // reordering the output does not change any row.
    std::vector<std::size_t> order(thresholds.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return thresholds[x] < thresholds[y]; });

    SweepResult result;
    for (std::size_t i : order) {
        RunConfig run = cfg;
        ThresholdConfig det = *base_detection;
        det.threshold = thresholds[i];
        det.threshold_minus.reset();
        run.detection = det;
        run.seed = derive_seed(cfg.seed, kSweepStream, i);
        RunResult r = run_experiment(run, RunOptions{false, false});

        SweepRow row;
        row.threshold = thresholds[i];
        double trials = static_cast<double>(r.table.total_trials());
        row.success_probability = success_probability(r.table);
        row.sigma_success_probability =
            std::sqrt(row.success_probability * (1.0 - row.success_probability) / trials);
        try {
            row.bell = chsh(r.table);
        } catch (const InsufficientData &e) {
            std::ostringstream msg;
            msg << "threshold " << thresholds[i] << ": " << e.what();
            throw InsufficientData(msg.str());
        }
        result.rows.push_back(row);
    }
    return result;
}

std::vector<double> default_sweep_thresholds(std::size_t points, double min_success, ThresholdSide side) {
    if (points < 2) {
        throw InvalidArgument("a sweep grid needs at least two points");
    }
    if (!(min_success > 0.0 && min_success < 1.0)) {
        throw InvalidArgument("minimum success probability must lie in (0, 1)");
    }
    std::vector<double> out;
    out.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
        double p = min_success + (1.0 - min_success) * static_cast<double>(i) / static_cast<double>(points - 1);
        out.push_back(threshold_for_success_probability(p, side));
    }
    std::sort(out.begin(), out.end());
    return out;
}

PairSource calibrate_source(double target_v_hv, double target_v_pm) {
    constexpr double max_visibility = 2.0 / std::numbers::pi;
    auto check = [&](double v, const char *name) {
        if (!(v > 0.0)) {
            throw InvalidArgument(std::string(name) + " target visibility must be positive");
        }
        if (v > max_visibility + 1e-12) {
            std::ostringstream msg;
            msg << name << " target visibility " << v << " exceeds 2/pi = " << max_visibility
                << ", unreachable without postselection";
            throw InvalidArgument(msg.str());
        }
    };
    check(target_v_hv, "(H,V)");
    check(target_v_pm, "(+,-)");
    PairSource src;
    src.t_z = std::min(1.0, target_v_hv * std::numbers::pi / 2.0);
    src.t_x = std::min(1.0, target_v_pm * std::numbers::pi / 2.0);
    return src;
}

}  // namespace bellsim
