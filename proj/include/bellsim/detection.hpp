#pragma once

#include <optional>
#include <string_view>

#include "bellsim/cloner.hpp"
#include "bellsim/polarization.hpp"
#include "bellsim/random.hpp"

namespace bellsim {

enum class Verdict { plus, minus, inconclusive };

std::string_view to_string(Verdict v) noexcept;
/// Accepts "PLUS", "MINUS", "INCONCLUSIVE" (case-insensitive).
Verdict parse_verdict(std::string_view text);

/// Photodiode thresholds, in units of the nominal pulse peak.
struct ThresholdConfig {
    double threshold = 0.5;
    double analog_noise_sigma = 0.0;
    /// Separate cut for the '-' photodiode; defaults to `threshold`.
    std::optional<double> threshold_minus;

    double minus_threshold() const noexcept { return threshold_minus.value_or(threshold); }
    void validate() const;
};

struct Intensities {
    double plus = 0.0;
    double minus = 0.0;
};

struct BSideResult {
    double i_plus = 0.0;
    double i_minus = 0.0;
    bool fired_plus = false;
    bool fired_minus = false;
    Verdict verdict = Verdict::inconclusive;
};

/// A person judging which of two spots is brighter. The discrimination gap
/// drifts sinusoidally with the trial index.
struct ObserverModel {
    double discrimination_gap = 0.5;
    double drift_amplitude = 0.0;
    /// Trials per drift cycle; 0 disables drift.
    double drift_period = 0.0;
    /// Phase offset of the drift, radians.
    double drift_phase = 0.0;

    /// Effective gap at a trial, clamped to [0, 1].
    double gap(std::uint64_t trial_index) const noexcept;
    void validate() const;
};

/// PBS split of a pulse: Malus law plus optional Gaussian analog noise,
/// clamped at zero. A circular analyzer splits any linear pulse evenly.
/// No random numbers are consumed when `noise_sigma` is zero.
Intensities split_intensities(const MacroPulse &pulse, const Basis &beta, double noise_sigma, Rng &rng);

/// Threshold postselection: conclusive only when exactly one photodiode
/// fires. Firing uses strict inequality, so an exact tie is inconclusive.
BSideResult classify(double i_plus, double i_minus, const ThresholdConfig &cfg) noexcept;

/// Single observer comparing brightness: conclusive when one spot exceeds
/// the other by more than the current gap.
Verdict observe_human(double i_plus, double i_minus, const ObserverModel &model,
                      std::uint64_t trial_index) noexcept;

/// One of two independent observers, each watching one PBS output: true when
/// the spot exceeds that observer's current threshold.
bool observer_sees(double intensity, const ObserverModel &model, std::uint64_t trial_index) noexcept;

enum class AClick { none, a1, a2 };

std::string_view to_string(AClick c) noexcept;
AClick parse_a_click(std::string_view text);

/// A-side APD pair: +1 lands on A1, -1 on A2, each detected with
/// `efficiency`. No random number is drawn when efficiency is 1.
AClick detect_A(int a_outcome, double efficiency, Rng &rng);

/// Closed-form success probability of the threshold rule for a uniformly
/// distributed pulse polarization, zero noise.
double threshold_success_probability(double threshold) noexcept;

enum class ThresholdSide { low, high };

/// Inverse of threshold_success_probability on the chosen side of 0.5.
double threshold_for_success_probability(double p, ThresholdSide side = ThresholdSide::low);

/// Observer gap (no drift) giving conclusive fraction `p` for uniform polarization.
double observer_gap_for_success_probability(double p);

}  // namespace bellsim
