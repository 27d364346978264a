#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bellsim/analysis.hpp"
#include "bellsim/experiment.hpp"

namespace bellsim {

/// What the observer is shown: two spot brightnesses and nothing else.
struct TrialPrompt {
    std::uint64_t trial_id = 0;
    double left_brightness = 0.0;
    double right_brightness = 0.0;
};

enum class AnswerStatus { accepted, duplicate };

const char *to_string(AnswerStatus s) noexcept;

/// LEFT, RIGHT or INCONCLUSIVE; LEFT is the plus arm.
Verdict parse_observer_answer(std::string_view s);

/// One observer working through a pre-planned schedule, one trial at a time.
/// Trial content is a pure function of (config, trial_id), exactly as in a
/// batch run; only the verdicts come from outside. Thread-safe.
class ObserverSession {
  public:
    ObserverSession(std::string id, RunConfig cfg);

    const std::string &id() const noexcept { return id_; }
    const RunConfig &config() const noexcept { return cfg_; }

    /// The pending trial, drawing a new one if none is pending. Empty once
    /// every scheduled trial has been answered.
    std::optional<TrialPrompt> next_trial();

    /// Accepts a verdict for the pending trial. A repeat answer for a trial
    /// already answered is reported as a duplicate and changes nothing; any
    /// other trial_id throws StaleTrial.
    AnswerStatus answer(std::uint64_t trial_id, Verdict verdict);

    /// CHSH estimate over the answers so far. Throws InsufficientData while
    /// some setting has no coincidences.
    BellEstimate results() const;

    CoincidenceTable table() const;
    std::vector<std::pair<std::uint64_t, Verdict>> answers() const;
    std::uint64_t answered() const;
    std::uint64_t total_trials() const noexcept { return total_; }
    bool complete() const;

  private:
    struct Slot {
        std::size_t setting_index;
        std::uint64_t trial_id;
    };

    std::string id_;
    RunConfig cfg_;
    std::vector<TrialBlock> blocks_;
    std::uint64_t total_ = 0;

    mutable std::mutex mu_;
    std::uint64_t cursor_ = 0;  // index of the next unanswered trial in schedule order
    std::size_t block_ = 0;
    std::optional<Flash> pending_;
    CoincidenceTable table_;
    std::vector<std::pair<std::uint64_t, Verdict>> answers_;

    Slot slot_at_cursor() const;
};

/// Owns the sessions of one service. The first session runs on the configured
/// seed; later ones get independent derived seeds.
class SessionRegistry {
  public:
    explicit SessionRegistry(RunConfig base);

    std::shared_ptr<ObserverSession> create();
    /// Throws NotFound.
    std::shared_ptr<ObserverSession> get(const std::string &id) const;
    std::size_t size() const;

  private:
    RunConfig base_;
    mutable std::mutex mu_;
    std::uint64_t created_ = 0;
    std::map<std::string, std::shared_ptr<ObserverSession>> sessions_;
};

}  // namespace bellsim
