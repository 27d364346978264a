#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "bellsim/cloner.hpp"
#include "bellsim/detection.hpp"
#include "bellsim/polarization.hpp"

namespace bellsim {

/// One (A analyzer, B analyzer) measurement setting.
struct Setting {
    Basis a;
    Basis b;

    static Setting degrees(double alpha_deg, double beta_deg) {
        return {Basis::linear_degrees(alpha_deg), Basis::linear_degrees(beta_deg)};
    }
    friend bool operator==(const Setting &, const Setting &) = default;
};

/// Analyzer equality up to 1e-9 rad, the resolution of persisted angles.
bool same_basis(const Basis &x, const Basis &y) noexcept;
bool same_setting(const Setting &x, const Setting &y) noexcept;

/// Two observers, one per PBS output, with independently drifting thresholds.
struct TwoObservers {
    ObserverModel plus_arm;
    ObserverModel minus_arm;
};

using DetectionModel = std::variant<ThresholdConfig, ObserverModel, TwoObservers>;

struct RunConfig {
    std::uint64_t trials_per_setting = 5000;
    std::vector<Setting> settings;
    /// Trials per contiguous block of one setting. Settings are visited
    /// round-robin in blocks; 0 means one block per setting.
    std::uint64_t block_length = 0;
    std::uint64_t seed = 1;
    PairSource source;
    ClonerConfig cloner;
    DetectionModel detection = ThresholdConfig{};
    double a_efficiency = 1.0;
    /// Worker threads for trial generation; 0 picks the hardware count.
    /// Results do not depend on this value.
    unsigned threads = 0;

    void validate() const;
    std::uint64_t effective_block_length() const noexcept {
        return block_length == 0 ? trials_per_setting : block_length;
    }
};

/// The four standard CHSH settings: a in {22.5, 67.5} deg, b in {0, 45} deg.
std::vector<Setting> chsh_settings();

struct TrialRecord {
    std::uint64_t trial_id = 0;
    std::uint64_t timestamp = 0;
    Basis a_basis;
    Basis b_basis;
    std::optional<PolAngle> hidden_theta;
    AClick a_click = AClick::none;
    double i_plus = 0.0;
    double i_minus = 0.0;
    Verdict verdict = Verdict::inconclusive;

    friend bool operator==(const TrialRecord &, const TrialRecord &) = default;
};

/// Counts for one setting. Cells are indexed [A1 or A2][B+ or B-].
struct SettingTally {
    Setting setting;
    std::array<std::array<std::uint64_t, 2>, 2> cells{};
    std::uint64_t trials = 0;
    std::uint64_t conclusive = 0;

    std::uint64_t cell(AClick a, Verdict b) const;
    std::uint64_t coincidences() const noexcept;
    void add(AClick a, Verdict b) noexcept;
    void merge(const SettingTally &other);

    friend bool operator==(const SettingTally &, const SettingTally &) = default;
};

struct CoincidenceTable {
    std::vector<SettingTally> settings;

    const SettingTally *find(const Setting &s) const noexcept;
    SettingTally &at_or_insert(const Setting &s);
    void merge(const CoincidenceTable &other);
    std::uint64_t total_trials() const noexcept;
    std::uint64_t total_conclusive() const noexcept;

    friend bool operator==(const CoincidenceTable &, const CoincidenceTable &) = default;
};

struct TrialBlock {
    std::size_t setting_index = 0;
    std::uint64_t first_trial_id = 0;
    std::uint64_t count = 0;
};

/// Expands the basis schedule into contiguous blocks in trial_id order.
std::vector<TrialBlock> schedule_blocks(const RunConfig &cfg);

/// Everything the B side and the A side produce for one flash, before the
/// B-side decision rule is applied. A pure function of (cfg, setting, trial_id).
struct Flash {
    std::uint64_t trial_id = 0;
    PolAngle hidden_theta;
    AClick a_click = AClick::none;
    Intensities intensities;
    std::uint64_t attempted_pairs = 0;
};

Flash generate_flash(const RunConfig &cfg, const Setting &setting, std::uint64_t trial_id);

/// Applies the configured B-side rule to a flash.
Verdict decide(const DetectionModel &model, const Intensities &in, std::uint64_t trial_id) noexcept;

struct RunResult {
    std::vector<TrialRecord> records;
    CoincidenceTable table;
    /// Pairs sent into the box, including those that produced no flash.
    std::uint64_t attempted_pairs = 0;
};

struct RunOptions {
    bool keep_records = true;
    bool reveal_hidden = false;
};

RunResult run_experiment(const RunConfig &cfg, const RunOptions &opts = {});

/// Same engine with the two-independent-observers rule; rejects configs
/// whose detection model is not TwoObservers.
RunResult run_two_observer_scenario(const RunConfig &cfg, const RunOptions &opts = {});

/// Rebuilds tallies from records. Settings appear in first-seen order.
CoincidenceTable tally_records(std::span<const TrialRecord> records);

/// A1 / B+ coincidence counts while the A analyzer is scanned at a fixed B basis.
struct FringeScan {
    std::string label;
    double beta_deg = 0.0;
    std::uint64_t trials_per_point = 0;
    std::vector<std::pair<double, double>> points;  // (alpha in degrees, count)
};

FringeScan run_fringe_scan(const RunConfig &base, std::string label, double beta_deg,
                           std::span<const double> alpha_deg, std::uint64_t trials_per_point);

/// `points` angles evenly spaced over [0, 180] degrees, both ends included.
std::vector<double> even_scan_angles(std::size_t points);

}  // namespace bellsim
