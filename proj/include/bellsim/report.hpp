#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bellsim/analysis.hpp"
#include "bellsim/experiment.hpp"
#include "bellsim/sweep.hpp"

namespace bellsim {

/// Everything derivable from a coincidence table plus optional fringe scans.
struct Analysis {
    CoincidenceTable table;
    double success_probability = 0.0;
    std::vector<std::pair<Setting, CorrelationTerm>> terms;  // settings with data
    std::optional<BellEstimate> bell;
    std::vector<VisibilityEstimate> direct_visibilities;
    std::vector<VisibilityEstimate> fringe_visibilities;
    std::vector<WitnessResult> witnesses;
};

/// Runs every estimator that applies to the table: correlation terms for
/// each setting, CHSH when the table is a two-by-two design, direct
/// visibilities for matched settings, fringe fits for the scans, and the
/// two- or three-visibility witnesses those visibilities support.
Analysis analyze(const CoincidenceTable &table, std::span<const FringeScan> scans = {});

/// Structured-text report. Deterministic for a given Analysis.
std::string format_report(const Analysis &analysis, const std::string &title = {});

std::string format_sweep_report(const SweepResult &sweep, const std::string &title = {});

/// Label for an analyzer pair, e.g. "(H,V)" for 0 deg, "(+,-)" for 45 deg.
std::string basis_pair_label(const Basis &b);

nlohmann::json bell_to_json(const BellEstimate &bell);

}  // namespace bellsim
