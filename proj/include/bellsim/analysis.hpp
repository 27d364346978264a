#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bellsim/experiment.hpp"
#include "bellsim/random.hpp"

namespace bellsim {

struct CorrelationTerm {
    double E = 0.0;
    double sigma = 0.0;
};

/// E = (N[A1,B+] + N[A2,B-] - N[A1,B-] - N[A2,B+]) / T over the coincidence
/// cells, with first-order Poisson error 2 sqrt(N_same N_diff / T^3).
/// Throws InsufficientData when the setting has no coincidences.
CorrelationTerm correlation_term(const SettingTally &tally);

/// Sign of each correlation term in the CHSH sum, ordered
/// (a1,b1), (a1,b2), (a2,b1), (a2,b2).
using ChshSigns = std::array<int, 4>;

/// The textbook placement: S = |E11 - E12 + E21 + E22|.
inline constexpr ChshSigns kTextbookChshSigns{+1, -1, +1, +1};

/// Places the single minus sign on the setting whose ideal-singlet
/// correlation -cos 2(a - b) has the opposite sign to the other three. Falls
/// back to the textbook placement when the geometry has no unique odd term.
ChshSigns chsh_signs_for_angles(PolAngle a1, PolAngle a2, PolAngle b1, PolAngle b2);

/// Which tallies of a table form the four CHSH terms. A angles are ordered
/// ascending into a1 < a2, likewise b1 < b2.
struct ChshLayout {
    std::array<const SettingTally *, 4> terms{};
    PolAngle a1, a2, b1, b2;
    ChshSigns signs = kTextbookChshSigns;
};

/// Throws InvalidArgument naming the missing setting when one of the four
/// combinations is absent, or when the table is not a two-by-two design.
ChshLayout chsh_layout(const CoincidenceTable &table);

struct BellEstimate {
    std::array<double, 4> E{};
    std::array<double, 4> sigma_E{};
    double S = 0.0;
    double sigma_S = 0.0;
    double success_probability = 0.0;
    ChshSigns signs = kTextbookChshSigns;
    /// S exceeds 2 sqrt(2): no quantum state produces this, the input is suspect.
    bool super_quantum = false;
};

BellEstimate chsh(const CoincidenceTable &table);

BellEstimate chsh_from_terms(const std::array<CorrelationTerm, 4> &terms, const ChshSigns &signs,
                             double success_probability);

/// Conclusive trials over all trials.
double success_probability(const CoincidenceTable &table);

enum class VisibilityMethod { direct, fringe_fit };

struct VisibilityEstimate {
    std::string label;
    double V = 0.0;
    double sigma = 0.0;
    VisibilityMethod method = VisibilityMethod::direct;
    /// Direct method: the raw coincidence correlation was negative, as for
    /// the singlet. V itself is reported as a magnitude.
    bool anticorrelated = false;
    /// Fringe fit: angle of the fringe maximum, degrees in [0, 180).
    double phase_deg = 0.0;
};

/// Correlation visibility from a setting with identical A and B bases.
VisibilityEstimate visibility_direct(const SettingTally &tally, std::string label = {});

/// Linear least-squares fit of N(alpha) = c0 + c1 cos 2a + c2 sin 2a with
/// Poisson weights; V = sqrt(c1^2 + c2^2) / c0. Needs at least 8 points
/// spanning 180 degrees of alpha.
VisibilityEstimate visibility_fringe_fit(std::span<const std::pair<double, double>> scan, std::string label = {});

struct WitnessResult {
    std::vector<std::pair<std::string, double>> components;
    double total = 0.0;
    double bound = 1.0;
    double sigma_total = 0.0;
    bool violated = false;

    /// (total - bound) in units of sigma_total; infinite when sigma is zero.
    double significance() const noexcept;
};

/// |V1 + V2| <= 1 for separable states, over two unbiased bases of the
/// linear great circle.
WitnessResult witness_two_visibilities(const VisibilityEstimate &v1, const VisibilityEstimate &v2);

/// |Vx + Vy + Vz| <= 1 for separable states.
WitnessResult witness_three_visibilities(const VisibilityEstimate &v1, const VisibilityEstimate &v2,
                                         const VisibilityEstimate &v3);

/// Collective-spin expectations of one side's field.
struct MacroStateSummary {
    double jx = 0.0;
    double jy = 0.0;
    double jz = 0.0;
    double n = 1.0;

    double length() const noexcept;
    bool physical() const noexcept { return n > 0.0 && length() <= n * (1.0 + 1e-12); }
};

/// The separable-state inequality chain
///   |jxA jxB + jyA jyB| <= |P J_A| |P J_B| <= |J_A| |J_B| <= nA nB
/// where P projects onto the x-y plane.
struct SeparableChain {
    double correlation = 0.0;
    double projected = 0.0;
    double full = 0.0;
    double number = 0.0;

    bool holds(double rel_tol = 1e-9) const noexcept;
};

SeparableChain separable_chain(const MacroStateSummary &a, const MacroStateSummary &b) noexcept;

struct SeparableBoundReport {
    std::uint64_t samples = 0;
    std::uint64_t violations = 0;
    /// Largest ratio correlation / (nA nB) seen; at most 1 when the bound holds.
    double max_normalized_correlation = 0.0;

    bool passed() const noexcept { return violations == 0; }
};

/// Samples random product macro-states and checks the chain for each.
SeparableBoundReport check_separable_bound(std::uint64_t sample_count, Rng &rng, double rel_tol = 1e-9);

}  // namespace bellsim
