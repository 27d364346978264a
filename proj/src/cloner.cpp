#include "bellsim/cloner.hpp"

#include <cmath>

#include "bellsim/error.hpp"

namespace bellsim {

void ClonerConfig::validate() const {
    if (!(detector_efficiency >= 0.0 && detector_efficiency <= 1.0)) {
        throw InvalidArgument("cloner detector_efficiency must lie in [0, 1]");
    }
    if (!(dark_click_rate >= 0.0 && dark_click_rate <= 1.0)) {
        throw InvalidArgument("cloner dark_click_rate must lie in [0, 1]");
    }
}

PolAngle sample_cloner_angle(Rng &rng) {
    return PolAngle::radians(rng.uniform() * std::numbers::pi);
}

std::optional<Amplification> attempt_amplification(const PairSource &src, const Basis &a_basis,
                                                    const ClonerConfig &cfg, Rng &rng) {
    PolAngle theta = sample_cloner_angle(rng);
    double e = pair_correlation(src, a_basis, theta);

    // Joint draw of (a, b) with P(a, b) = (1 + a b E) / 4; b = +1 means the
    // B photon passes the polarizer at theta.
    double u = rng.uniform();
    double p_same = 0.25 * (1.0 + e);
    double p_diff = 0.25 * (1.0 - e);
    int a;
    int b;
    if (u < p_same) {
        a = 1;
        b = 1;
    } else if (u < p_same + p_diff) {
        a = 1;
        b = -1;
    } else if (u < p_same + 2.0 * p_diff) {
        a = -1;
        b = 1;
    } else {
        a = -1;
        b = -1;
    }

    bool click = b == 1 && rng.bernoulli(cfg.detector_efficiency);
    if (!click && cfg.dark_click_rate > 0.0) {
        click = rng.bernoulli(cfg.dark_click_rate);
    }
    if (!click) {
        return std::nullopt;
    }
    return Amplification{a, MacroPulse{theta, 1.0}, theta};
}

std::optional<Amplification> attempt_amplification(const PairSource &src, PolAngle alpha,
                                                    const ClonerConfig &cfg, Rng &rng) {
    return attempt_amplification(src, Basis::linear(alpha), cfg, rng);
}

std::optional<MacroPulse> amplify_single_photon(PolAngle input, const ClonerConfig &cfg, Rng &rng) {
    PolAngle theta = sample_cloner_angle(rng);
    double c = std::cos(theta.radians() - input.radians());
    bool click = rng.bernoulli(c * c) && rng.bernoulli(cfg.detector_efficiency);
    if (!click && cfg.dark_click_rate > 0.0) {
        click = rng.bernoulli(cfg.dark_click_rate);
    }
    if (!click) {
        return std::nullopt;
    }
    return MacroPulse{theta, 1.0};
}

}  // namespace bellsim
