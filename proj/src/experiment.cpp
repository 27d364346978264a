#include "bellsim/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>
#include <thread>

#include "bellsim/error.hpp"
#include "bellsim/random.hpp"

namespace bellsim {

namespace {

constexpr std::uint64_t kTrialStream = 0x7472;  // "tr"
constexpr std::uint64_t kScanStream = 0x7363;   // "sc"
constexpr std::uint64_t kMaxAttemptsPerTrial = 1'000'000'000ULL;

constexpr double kAngleTolerance = 1e-9;

std::size_t cell_index(AClick a) { return a == AClick::a1 ? 0 : 1; }
std::size_t cell_index(Verdict v) { return v == Verdict::plus ? 0 : 1; }

}  // namespace

bool same_basis(const Basis &x, const Basis &y) noexcept {
    if (x.kind != y.kind) {
        return false;
    }
    if (x.is_circular()) {
        return true;
    }
    double d = std::fabs(x.primary.radians() - y.primary.radians());
    return d < kAngleTolerance || std::fabs(d - std::numbers::pi) < kAngleTolerance;
}

bool same_setting(const Setting &x, const Setting &y) noexcept {
    return same_basis(x.a, y.a) && same_basis(x.b, y.b);
}

std::vector<Setting> chsh_settings() {
    return {Setting::degrees(22.5, 0.0), Setting::degrees(22.5, 45.0), Setting::degrees(67.5, 0.0),
            Setting::degrees(67.5, 45.0)};
}

void RunConfig::validate() const {
    if (trials_per_setting == 0) {
        throw InvalidArgument("trials_per_setting must be positive");
    }
    if (settings.empty()) {
        throw InvalidArgument("basis schedule must contain at least one setting");
    }
    source.validate();
    cloner.validate();
    if (cloner.detector_efficiency <= 0.0 && cloner.dark_click_rate <= 0.0) {
        throw InvalidArgument("cloner can never click: detector_efficiency and dark_click_rate are both zero");
    }
    if (!(a_efficiency >= 0.0 && a_efficiency <= 1.0)) {
        throw InvalidArgument("A-side efficiency must lie in [0, 1]");
    }
    std::visit(
        [](const auto &m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, TwoObservers>) {
                m.plus_arm.validate();
                m.minus_arm.validate();
            } else {
                m.validate();
            }
        },
        detection);
}

std::uint64_t SettingTally::cell(AClick a, Verdict b) const {
    if (a == AClick::none || b == Verdict::inconclusive) {
        throw InvalidArgument("coincidence cells need an A click and a conclusive verdict");
    }
    return cells[cell_index(a)][cell_index(b)];
}

std::uint64_t SettingTally::coincidences() const noexcept {
    return cells[0][0] + cells[0][1] + cells[1][0] + cells[1][1];
}

void SettingTally::add(AClick a, Verdict b) noexcept {
    ++trials;
    if (b == Verdict::inconclusive) {
        return;
    }
    ++conclusive;
    if (a != AClick::none) {
        ++cells[cell_index(a)][cell_index(b)];
    }
}

void SettingTally::merge(const SettingTally &other) {
    for (std::size_t i = 0; i < 2; ++i) {
        for (std::size_t j = 0; j < 2; ++j) {
            cells[i][j] += other.cells[i][j];
        }
    }
    trials += other.trials;
    conclusive += other.conclusive;
}

const SettingTally *CoincidenceTable::find(const Setting &s) const noexcept {
    for (const auto &t : settings) {
        if (same_setting(t.setting, s)) {
            return &t;
        }
    }
    return nullptr;
}

SettingTally &CoincidenceTable::at_or_insert(const Setting &s) {
    for (auto &t : settings) {
        if (same_setting(t.setting, s)) {
            return t;
        }
    }
    settings.push_back(SettingTally{s, {}, 0, 0});
    return settings.back();
}

void CoincidenceTable::merge(const CoincidenceTable &other) {
    for (const auto &t : other.settings) {
        at_or_insert(t.setting).merge(t);
    }
}

std::uint64_t CoincidenceTable::total_trials() const noexcept {
    std::uint64_t n = 0;
    for (const auto &t : settings) {
        n += t.trials;
    }
    return n;
}

std::uint64_t CoincidenceTable::total_conclusive() const noexcept {
    std::uint64_t n = 0;
    for (const auto &t : settings) {
        n += t.conclusive;
    }
    return n;
}

std::vector<TrialBlock> schedule_blocks(const RunConfig &cfg) {
    std::vector<TrialBlock> blocks;
    std::vector<std::uint64_t> remaining(cfg.settings.size(), cfg.trials_per_setting);
    std::uint64_t block = cfg.effective_block_length();
    std::uint64_t next_id = 0;
    bool any = true;
    while (any) {
        any = false;
        for (std::size_t s = 0; s < cfg.settings.size(); ++s) {
            if (remaining[s] == 0) {
                continue;
            }
            std::uint64_t n = std::min(block, remaining[s]);
            blocks.push_back(TrialBlock{s, next_id, n});
            next_id += n;
            remaining[s] -= n;
            any = true;
        }
    }
    return blocks;
}

Flash generate_flash(const RunConfig &cfg, const Setting &setting, std::uint64_t trial_id) {
    Rng rng(derive_seed(cfg.seed, kTrialStream, trial_id));
    Flash f;
    f.trial_id = trial_id;
    std::optional<Amplification> amp;
    while (!amp) {
        if (++f.attempted_pairs > kMaxAttemptsPerTrial) {
            throw InvalidArgument("cloner produced no flash within the attempt limit");
        }
        amp = attempt_amplification(cfg.source, setting.a, cfg.cloner, rng);
    }
    f.hidden_theta = amp->hidden_theta;
    f.a_click = detect_A(amp->a_outcome, cfg.a_efficiency, rng);
    double noise = 0.0;
    if (const auto *t = std::get_if<ThresholdConfig>(&cfg.detection)) {
        noise = t->analog_noise_sigma;
    }
    f.intensities = split_intensities(amp->pulse, setting.b, noise, rng);
    return f;
}

Verdict decide(const DetectionModel &model, const Intensities &in, std::uint64_t trial_id) noexcept {
    return std::visit(
        [&](const auto &m) -> Verdict {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ThresholdConfig>) {
                return classify(in.plus, in.minus, m).verdict;
            } else if constexpr (std::is_same_v<T, ObserverModel>) {
                return observe_human(in.plus, in.minus, m, trial_id);
            } else {
                bool plus = observer_sees(in.plus, m.plus_arm, trial_id);
                bool minus = observer_sees(in.minus, m.minus_arm, trial_id);
                if (plus && !minus) {
                    return Verdict::plus;
                }
                if (minus && !plus) {
                    return Verdict::minus;
                }
                return Verdict::inconclusive;
            }
        },
        model);
}

RunResult run_experiment(const RunConfig &cfg, const RunOptions &opts) {
    cfg.validate();
    const auto blocks = schedule_blocks(cfg);
    const std::uint64_t total = cfg.trials_per_setting * cfg.settings.size();

    // Flat lookup: block index for any trial id range handled by a worker.
    std::vector<std::uint64_t> block_starts;
    block_starts.reserve(blocks.size());
    for (const auto &b : blocks) {
        block_starts.push_back(b.first_trial_id);
    }

    RunResult result;
    if (opts.keep_records) {
        result.records.resize(total);
    }

    unsigned workers = cfg.threads != 0 ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
    workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, total / 1024)));

    struct Partial {
        std::vector<SettingTally> tallies;
        std::uint64_t attempted = 0;
    };
    std::vector<Partial> partials(workers);
    for (auto &p : partials) {
        p.tallies.resize(cfg.settings.size());
        for (std::size_t s = 0; s < cfg.settings.size(); ++s) {
            p.tallies[s].setting = cfg.settings[s];
        }
    }

    auto work = [&](unsigned w) {
        std::uint64_t lo = total * w / workers;
        std::uint64_t hi = total * (w + 1) / workers;
        auto it = std::upper_bound(block_starts.begin(), block_starts.end(), lo);
        std::size_t bi = static_cast<std::size_t>(it - block_starts.begin()) - 1;
        Partial &part = partials[w];
        for (std::uint64_t id = lo; id < hi; ++id) {
            while (id >= blocks[bi].first_trial_id + blocks[bi].count) {
                ++bi;
            }
            std::size_t s = blocks[bi].setting_index;
            const Setting &setting = cfg.settings[s];
            Flash f = generate_flash(cfg, setting, id);
            Verdict v = decide(cfg.detection, f.intensities, id);
            part.tallies[s].add(f.a_click, v);
            part.attempted += f.attempted_pairs;
            if (opts.keep_records) {
                TrialRecord &r = result.records[id];
                r.trial_id = id;
                r.timestamp = id;
                r.a_basis = setting.a;
                r.b_basis = setting.b;
                if (opts.reveal_hidden) {
                    r.hidden_theta = f.hidden_theta;
                }
                r.a_click = f.a_click;
                r.i_plus = f.intensities.plus;
                r.i_minus = f.intensities.minus;
                r.verdict = v;
            }
        }
    };

    std::vector<std::exception_ptr> failures(workers);
    auto guarded = [&](unsigned w) {
        try {
            work(w);
        } catch (...) {
            failures[w] = std::current_exception();
        }
    };
    if (workers == 1) {
        guarded(0);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            pool.emplace_back(guarded, w);
        }
    }
    for (const auto &f : failures) {
        if (f) {
            std::rethrow_exception(f);
        }
    }

    // Settings keep their schedule order.
    for (std::size_t s = 0; s < cfg.settings.size(); ++s) {
        SettingTally merged{cfg.settings[s], {}, 0, 0};
        for (const auto &p : partials) {
            merged.merge(p.tallies[s]);
        }
        result.table.settings.push_back(merged);
    }
    for (const auto &p : partials) {
        result.attempted_pairs += p.attempted;
    }
    return result;
}

RunResult run_two_observer_scenario(const RunConfig &cfg, const RunOptions &opts) {
    if (!std::holds_alternative<TwoObservers>(cfg.detection)) {
        throw InvalidArgument("two-observer scenario needs a two_observers detection model");
    }
    return run_experiment(cfg, opts);
}

CoincidenceTable tally_records(std::span<const TrialRecord> records) {
    CoincidenceTable table;
    for (const auto &r : records) {
        table.at_or_insert(Setting{r.a_basis, r.b_basis}).add(r.a_click, r.verdict);
    }
    return table;
}

FringeScan run_fringe_scan(const RunConfig &base, std::string label, double beta_deg,
                           std::span<const double> alpha_deg, std::uint64_t trials_per_point) {
    FringeScan scan;
    scan.label = std::move(label);
    scan.beta_deg = beta_deg;
    scan.trials_per_point = trials_per_point;
    for (std::size_t i = 0; i < alpha_deg.size(); ++i) {
        RunConfig cfg = base;
        cfg.settings = {Setting::degrees(alpha_deg[i], beta_deg)};
        cfg.trials_per_setting = trials_per_point;
        cfg.block_length = 0;
        cfg.seed = derive_seed(base.seed, kScanStream, i);
        RunResult r = run_experiment(cfg, RunOptions{false, false});
        const auto &t = r.table.settings.front();
        scan.points.emplace_back(alpha_deg[i], static_cast<double>(t.cells[0][0]));
    }
    return scan;
}

std::vector<double> even_scan_angles(std::size_t points) {
    std::vector<double> out;
    out.reserve(points);
    if (points < 2) {
        throw InvalidArgument("a fringe scan needs at least two angles");
    }
    for (std::size_t i = 0; i < points; ++i) {
        out.push_back(180.0 * static_cast<double>(i) / static_cast<double>(points - 1));
    }
    return out;
}

}  // namespace bellsim
