#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "bellsim/experiment.hpp"
#include "bellsim/sweep.hpp"

namespace bellsim {

// Trial log: one JSON object per line with the TrialRecord fields. Angles
// are in degrees. `hidden_theta` appears only on records that carry it.
void write_trial_log(std::ostream &out, std::span<const TrialRecord> records);
std::vector<TrialRecord> read_trial_log(std::istream &in);

// Counts file in the coincidence-table layout: B analyzer rows, A analyzer
// columns, each analyzer as a (primary, orthogonal) pair.
//
//   trials_per_setting 1000
//   beta\alpha  22.5  112.5  67.5  157.5
//   0           15    134    112   44
//   90          144   26     46    135
//
// Optional `trials <alpha> <beta> <n>` and `conclusive <alpha> <beta> <n>`
// lines give per-setting totals. Unmeasured settings are written as '-'.
void write_counts(std::ostream &out, const CoincidenceTable &table);
CoincidenceTable read_counts(std::istream &in);

void write_scan(std::ostream &out, const FringeScan &scan);
FringeScan read_scan(std::istream &in);

/// Flat tab-separated series for plotting: one row per threshold.
void write_series(std::ostream &out, const SweepResult &sweep);

enum class InputKind { trial_log, counts };

/// Trial logs start with '{' (an empty input counts as an empty log);
/// anything else is read as a counts file.
InputKind sniff_input(std::istream &in);

/// Reads a trial log or counts file into a coincidence table. Throws
/// InsufficientData when the input holds no trials.
CoincidenceTable load_table(const std::filesystem::path &path);

std::vector<TrialRecord> load_trial_log(const std::filesystem::path &path);
FringeScan load_scan(const std::filesystem::path &path);

}  // namespace bellsim
