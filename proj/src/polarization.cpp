#include "bellsim/polarization.hpp"

#include <cmath>
#include <sstream>

#include "bellsim/error.hpp"

namespace bellsim {

PolAngle PolAngle::radians(double value) {
    if (!std::isfinite(value)) {
        throw InvalidArgument("polarization angle must be finite");
    }
    constexpr double pi = std::numbers::pi;
    double r = std::fmod(value, pi);
    if (r < 0.0) {
        r += pi;
    }
    if (r >= pi) {
        r = 0.0;
    }
    PolAngle out;
    out.value_ = r;
    return out;
}

void PairSource::validate() const {
    auto in_unit = [](double t) { return std::isfinite(t) && t >= 0.0 && t <= 1.0; };
    if (!in_unit(t_z) || !in_unit(t_x)) {
        std::ostringstream msg;
        msg << "pair source correlation strengths must lie in [0, 1], got t_z=" << t_z << " t_x=" << t_x;
        throw InvalidArgument(msg.str());
    }
}

double pair_correlation(const PairSource &src, PolAngle alpha, PolAngle beta) noexcept {
    double a2 = 2.0 * alpha.radians();
    double b2 = 2.0 * beta.radians();
    return -(src.t_z * std::cos(a2) * std::cos(b2) + src.t_x * std::sin(a2) * std::sin(b2));
}

double pair_correlation(const PairSource &src, const Basis &a_basis, PolAngle beta) noexcept {
    if (a_basis.is_circular()) {
        return 0.0;
    }
    return pair_correlation(src, a_basis.primary, beta);
}

double joint_outcome_probability(const PairSource &src, PolAngle alpha, PolAngle theta, int a, int b) {
    if ((a != 1 && a != -1) || (b != 1 && b != -1)) {
        throw InvalidArgument("outcomes must be +1 or -1");
    }
    return 0.25 * (1.0 + a * b * pair_correlation(src, alpha, theta));
}

}  // namespace bellsim
