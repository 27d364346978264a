#pragma once

#include <numbers>

namespace bellsim {

/// Direction of linear polarization. Linear polarization is pi-periodic, so
/// the stored value is always in [0, pi).
class PolAngle {
  public:
    constexpr PolAngle() = default;

    static PolAngle radians(double value);
    static PolAngle degrees(double value) { return radians(value * std::numbers::pi / 180.0); }

    double radians() const noexcept { return value_; }
    double degrees() const noexcept { return value_ * 180.0 / std::numbers::pi; }

    PolAngle orthogonal() const { return radians(value_ + std::numbers::pi / 2.0); }

    friend bool operator==(PolAngle, PolAngle) = default;

  private:
    double value_ = 0.0;
};

/// Two-outcome polarization analyzer. A linear basis has outcomes '+' along
/// `primary` and '-' along the orthogonal direction. The circular basis sits
/// off the linear great circle and carries no angle.
struct Basis {
    enum class Kind { linear, circular };

    PolAngle primary;
    Kind kind = Kind::linear;

    static Basis linear(PolAngle angle) { return Basis{angle, Kind::linear}; }
    static Basis linear_degrees(double deg) { return linear(PolAngle::degrees(deg)); }
    static Basis circular() { return Basis{PolAngle{}, Kind::circular}; }

    bool is_circular() const noexcept { return kind == Kind::circular; }

    friend bool operator==(const Basis &, const Basis &) = default;
};

/// The photon-pair source as a diagonal correlation tensor on the linear
/// great circle. `t_z` scales the (H,V) axis and `t_x` the (+,-) axis; the
/// ideal singlet has both equal to 1.
struct PairSource {
    double t_z = 1.0;
    double t_x = 1.0;

    static PairSource ideal_singlet() { return {1.0, 1.0}; }

    /// Throws InvalidArgument unless both strengths lie in [0, 1].
    void validate() const;
};

/// E_pair(alpha, beta) = -(t_z cos2a cos2b + t_x sin2a sin2b).
double pair_correlation(const PairSource &src, PolAngle alpha, PolAngle beta) noexcept;

/// Correlation between an A-side analyzer and a B-side linear projection.
/// Zero when the A analyzer is circular: the tensor has no cross terms
/// between the circular axis and the linear circle.
double pair_correlation(const PairSource &src, const Basis &a_basis, PolAngle beta) noexcept;

/// P(a, b) = (1 + a b E_pair) / 4 for outcomes a, b in {+1, -1}.
double joint_outcome_probability(const PairSource &src, PolAngle alpha, PolAngle theta, int a, int b);

}  // namespace bellsim
