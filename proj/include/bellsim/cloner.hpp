#pragma once

#include <optional>

#include "bellsim/polarization.hpp"
#include "bellsim/random.hpp"

namespace bellsim {

/// Measure-and-prepare amplifier: a rotating linear polarizer in front of a
/// single-photon detector, driving a laser aligned with the polarizer.
struct ClonerConfig {
    double detector_efficiency = 0.07;
    /// Probability of a spurious click per incoming photon. Off by default.
    double dark_click_rate = 0.0;

    void validate() const;
};

/// The macroscopic flash emitted on a click.
struct MacroPulse {
    PolAngle polarization;
    double peak_intensity = 1.0;
};

/// Outcome of one pair that produced a flash.
struct Amplification {
    int a_outcome = 0;  // +1 or -1, the A photon's projection on the A basis
    MacroPulse pulse;
    PolAngle hidden_theta;  // polarizer angle at click time; simulation ground truth
};

/// Polarizer direction for one incoming photon, uniform on [0, pi).
PolAngle sample_cloner_angle(Rng &rng);

/// Sends one pair through the box. Returns nothing when the B photon is
/// absorbed by the polarizer or missed by the detector; that is not a trial.
std::optional<Amplification> attempt_amplification(const PairSource &src, const Basis &a_basis,
                                                    const ClonerConfig &cfg, Rng &rng);

std::optional<Amplification> attempt_amplification(const PairSource &src, PolAngle alpha,
                                                    const ClonerConfig &cfg, Rng &rng);

/// Amplifies a single photon of known linear polarization. Used to check the
/// cloning fidelity of the box in isolation.
std::optional<MacroPulse> amplify_single_photon(PolAngle input, const ClonerConfig &cfg, Rng &rng);

}  // namespace bellsim
