#include "bellsim/detection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "bellsim/error.hpp"

namespace bellsim {

namespace {

std::string upper(std::string_view text) {
    std::string out(text);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::toupper(c); });
    return out;
}

Verdict verdict_from_fired(bool plus, bool minus) noexcept {
    if (plus && !minus) {
        return Verdict::plus;
    }
    if (minus && !plus) {
        return Verdict::minus;
    }
    return Verdict::inconclusive;
}

}  // namespace

std::string_view to_string(Verdict v) noexcept {
    switch (v) {
    case Verdict::plus:
        return "PLUS";
    case Verdict::minus:
        return "MINUS";
    case Verdict::inconclusive:
        break;
    }
    return "INCONCLUSIVE";
}

Verdict parse_verdict(std::string_view text) {
    std::string u = upper(text);
    if (u == "PLUS") {
        return Verdict::plus;
    }
    if (u == "MINUS") {
        return Verdict::minus;
    }
    if (u == "INCONCLUSIVE") {
        return Verdict::inconclusive;
    }
    throw ParseError("unknown verdict '" + std::string(text) + "'");
}

std::string_view to_string(AClick c) noexcept {
    switch (c) {
    case AClick::a1:
        return "A1";
    case AClick::a2:
        return "A2";
    case AClick::none:
        break;
    }
    return "none";
}

AClick parse_a_click(std::string_view text) {
    std::string u = upper(text);
    if (u == "A1") {
        return AClick::a1;
    }
    if (u == "A2") {
        return AClick::a2;
    }
    if (u == "NONE") {
        return AClick::none;
    }
    throw ParseError("unknown A-side click '" + std::string(text) + "'");
}

void ThresholdConfig::validate() const {
    if (!(threshold > 0.0)) {
        throw InvalidArgument("threshold must be positive");
    }
    if (threshold_minus && !(*threshold_minus > 0.0)) {
        throw InvalidArgument("threshold_minus must be positive");
    }
    if (!(analog_noise_sigma >= 0.0) || !std::isfinite(analog_noise_sigma)) {
        throw InvalidArgument("analog_noise_sigma must be a finite non-negative number");
    }
}

double ObserverModel::gap(std::uint64_t trial_index) const noexcept {
    double g = discrimination_gap;
    if (drift_amplitude != 0.0 && drift_period > 0.0) {
        g += drift_amplitude *
             std::sin(2.0 * std::numbers::pi * static_cast<double>(trial_index) / drift_period + drift_phase);
    }
    return std::clamp(g, 0.0, 1.0);
}

void ObserverModel::validate() const {
    if (std::isnan(discrimination_gap) || discrimination_gap < 0.0) {
        throw InvalidArgument("observer discrimination_gap must be non-negative");
    }
    if (!std::isfinite(drift_amplitude) || !std::isfinite(drift_phase)) {
        throw InvalidArgument("observer drift parameters must be finite");
    }
    if (!(drift_period >= 0.0)) {
        throw InvalidArgument("observer drift_period must be non-negative");
    }
}

Intensities split_intensities(const MacroPulse &pulse, const Basis &beta, double noise_sigma, Rng &rng) {
    Intensities out;
    if (beta.is_circular()) {
        out.plus = 0.5 * pulse.peak_intensity;
        out.minus = 0.5 * pulse.peak_intensity;
    } else {
        double c = std::cos(pulse.polarization.radians() - beta.primary.radians());
        double cos2 = c * c;
        out.plus = cos2 * pulse.peak_intensity;
        out.minus = (1.0 - cos2) * pulse.peak_intensity;
    }
    if (noise_sigma > 0.0) {
        out.plus = std::max(0.0, out.plus + noise_sigma * rng.normal());
        out.minus = std::max(0.0, out.minus + noise_sigma * rng.normal());
    }
    return out;
}

BSideResult classify(double i_plus, double i_minus, const ThresholdConfig &cfg) noexcept {
    BSideResult r;
    r.i_plus = i_plus;
    r.i_minus = i_minus;
    r.fired_plus = i_plus > cfg.threshold;
    r.fired_minus = i_minus > cfg.minus_threshold();
    r.verdict = verdict_from_fired(r.fired_plus, r.fired_minus);
    return r;
}

Verdict observe_human(double i_plus, double i_minus, const ObserverModel &model,
                      std::uint64_t trial_index) noexcept {
    double g = model.gap(trial_index);
    if (i_plus - i_minus > g) {
        return Verdict::plus;
    }
    if (i_minus - i_plus > g) {
        return Verdict::minus;
    }
    return Verdict::inconclusive;
}

bool observer_sees(double intensity, const ObserverModel &model, std::uint64_t trial_index) noexcept {
    if (std::isinf(model.discrimination_gap)) {
        return false;
    }
    return intensity > model.gap(trial_index);
}

AClick detect_A(int a_outcome, double efficiency, Rng &rng) {
    if (a_outcome != 1 && a_outcome != -1) {
        throw InvalidArgument("A outcome must be +1 or -1");
    }
    if (!(efficiency >= 0.0 && efficiency <= 1.0)) {
        throw InvalidArgument("A-side efficiency must lie in [0, 1]");
    }
    if (efficiency < 1.0 && !rng.bernoulli(efficiency)) {
        return AClick::none;
    }
    return a_outcome == 1 ? AClick::a1 : AClick::a2;
}

double threshold_success_probability(double threshold) noexcept {
    // Conclusive iff |cos 2(theta - beta)| > |2t - 1|.
    double c = std::fabs(2.0 * threshold - 1.0);
    if (c >= 1.0) {
        return 0.0;
    }
    return 2.0 * std::acos(c) / std::numbers::pi;
}

double threshold_for_success_probability(double p, ThresholdSide side) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw InvalidArgument("success probability must lie in (0, 1]");
    }
    double c = std::cos(p * std::numbers::pi / 2.0);
    return side == ThresholdSide::low ? 0.5 * (1.0 - c) : 0.5 * (1.0 + c);
}

double observer_gap_for_success_probability(double p) {
    if (!(p > 0.0 && p <= 1.0)) {
        throw InvalidArgument("success probability must lie in (0, 1]");
    }
    return std::cos(p * std::numbers::pi / 2.0);
}

}  // namespace bellsim
