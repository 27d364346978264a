#include "bellsim/session.hpp"

#include <algorithm>

#include "bellsim/error.hpp"
#include "bellsim/random.hpp"

namespace bellsim {

namespace {

constexpr std::uint64_t kSessionStream = 0x7365;

double clip01(double x) noexcept { return std::clamp(x, 0.0, 1.0); }

}  // namespace

const char *to_string(AnswerStatus s) noexcept { return s == AnswerStatus::accepted ? "accepted" : "duplicate"; }

Verdict parse_observer_answer(std::string_view s) {
    if (s == "LEFT") {
        return Verdict::plus;
    }
    if (s == "RIGHT") {
        return Verdict::minus;
    }
    if (s == "INCONCLUSIVE") {
        return Verdict::inconclusive;
    }
    throw InvalidArgument("verdict must be LEFT, RIGHT or INCONCLUSIVE, got '" + std::string(s) + "'");
}

ObserverSession::ObserverSession(std::string id, RunConfig cfg) : id_(std::move(id)), cfg_(std::move(cfg)) {
    cfg_.validate();
    blocks_ = schedule_blocks(cfg_);
    total_ = cfg_.trials_per_setting * cfg_.settings.size();
    for (const auto &s : cfg_.settings) {
        table_.at_or_insert(s);
    }
}

ObserverSession::Slot ObserverSession::slot_at_cursor() const {
    const TrialBlock &b = blocks_[block_];
    return Slot{b.setting_index, cursor_};
}

std::optional<TrialPrompt> ObserverSession::next_trial() {
    std::lock_guard lock(mu_);
    if (cursor_ >= total_) {
        return std::nullopt;
    }
    if (!pending_) {
        Slot slot = slot_at_cursor();
        pending_ = generate_flash(cfg_, cfg_.settings[slot.setting_index], slot.trial_id);
    }
    return TrialPrompt{pending_->trial_id, clip01(pending_->intensities.plus), clip01(pending_->intensities.minus)};
}

AnswerStatus ObserverSession::answer(std::uint64_t trial_id, Verdict verdict) {
    std::lock_guard lock(mu_);
    if (trial_id < cursor_) {
        return AnswerStatus::duplicate;
    }
    if (!pending_ || pending_->trial_id != trial_id) {
        throw StaleTrial("trial " + std::to_string(trial_id) + " is not the pending trial");
    }
    const Setting &setting = cfg_.settings[blocks_[block_].setting_index];
    table_.at_or_insert(setting).add(pending_->a_click, verdict);
    answers_.emplace_back(trial_id, verdict);
    pending_.reset();
    ++cursor_;
    if (block_ + 1 < blocks_.size() && cursor_ >= blocks_[block_].first_trial_id + blocks_[block_].count) {
        ++block_;
    }
    return AnswerStatus::accepted;
}

BellEstimate ObserverSession::results() const {
    CoincidenceTable t = table();
    return chsh(t);
}

CoincidenceTable ObserverSession::table() const {
    std::lock_guard lock(mu_);
    return table_;
}

std::vector<std::pair<std::uint64_t, Verdict>> ObserverSession::answers() const {
    std::lock_guard lock(mu_);
    return answers_;
}

std::uint64_t ObserverSession::answered() const {
    std::lock_guard lock(mu_);
    return cursor_;
}

bool ObserverSession::complete() const {
    std::lock_guard lock(mu_);
    return cursor_ >= total_;
}

SessionRegistry::SessionRegistry(RunConfig base) : base_(std::move(base)) { base_.validate(); }

std::shared_ptr<ObserverSession> SessionRegistry::create() {
    std::lock_guard lock(mu_);
    RunConfig cfg = base_;
    if (created_ > 0) {
        cfg.seed = derive_seed(base_.seed, kSessionStream, created_);
    }
    ++created_;
    std::string id = "s" + std::to_string(created_);
    auto session = std::make_shared<ObserverSession>(id, std::move(cfg));
    sessions_.emplace(id, session);
    return session;
}

std::shared_ptr<ObserverSession> SessionRegistry::get(const std::string &id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) {
        throw NotFound("no session '" + id + "'");
    }
    return it->second;
}

std::size_t SessionRegistry::size() const {
    std::lock_guard lock(mu_);
    return sessions_.size();
}

}  // namespace bellsim
