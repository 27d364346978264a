#include "bellsim/bellsim.h"

#include <cstring>
#include <fstream>
#include <string>

#include "bellsim/config.hpp"
#include "bellsim/error.hpp"
#include "bellsim/formats.hpp"
#include "bellsim/report.hpp"
#include "bellsim/service.hpp"
#include "bellsim/sweep.hpp"

struct bellsim_config {
    bellsim::Config cfg;
};

struct bellsim_result {
    std::string title;
    std::vector<bellsim::TrialRecord> records;
    std::vector<bellsim::FringeScan> scans;
    bellsim::Analysis analysis;
};

struct bellsim_sweep {
    std::string title;
    bellsim::SweepResult sweep;
};

namespace {

thread_local std::string g_last_error;

template <typename F>
bellsim_status guard(F &&f) noexcept {
    try {
        g_last_error.clear();
        f();
        return BELLSIM_OK;
    } catch (const bellsim::Error &e) {
        g_last_error = e.what();
        return static_cast<bellsim_status>(e.code());
    } catch (const std::bad_alloc &) {
        g_last_error = "out of memory";
    } catch (const std::exception &e) {
        g_last_error = e.what();
    } catch (...) {
        g_last_error = "unknown error";
    }
    return BELLSIM_E_INTERNAL;
}

void require(const void *p, const char *what) {
    if (p == nullptr) {
        throw bellsim::InvalidArgument(std::string(what) + " must not be null");
    }
}

char *dup_string(const std::string &s) {
    char *out = static_cast<char *>(std::malloc(s.size() + 1));
    if (out == nullptr) {
        throw std::bad_alloc();
    }
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::ofstream open_out(const char *path) {
    std::ofstream out(path);
    if (!out) {
        throw bellsim::IoError(std::string("cannot write ") + path);
    }
    return out;
}

void finish(std::ofstream &out, const char *path) {
    out.flush();
    if (!out) {
        throw bellsim::IoError(std::string("write failed: ") + path);
    }
}

}  // namespace

extern "C" {

const char *bellsim_version(void) { return "1.0.0"; }

const char *bellsim_last_error(void) { return g_last_error.c_str(); }

void bellsim_string_free(char *s) { std::free(s); }

bellsim_status bellsim_config_load(const char *path, bellsim_config **out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        *out = new bellsim_config{bellsim::load_config(path)};
    });
}

bellsim_status bellsim_config_parse(const char *text, const char *base_dir, bellsim_config **out) {
    return guard([&] {
        require(text, "text");
        require(out, "out");
        *out = new bellsim_config{bellsim::parse_config(text, base_dir ? base_dir : "")};
    });
}

void bellsim_config_free(bellsim_config *cfg) { delete cfg; }

bellsim_status bellsim_config_set_seed(bellsim_config *cfg, uint64_t seed) {
    return guard([&] {
        require(cfg, "config");
        cfg->cfg.run.seed = seed;
    });
}

bellsim_status bellsim_config_set_threads(bellsim_config *cfg, unsigned threads) {
    return guard([&] {
        require(cfg, "config");
        cfg->cfg.run.threads = threads;
    });
}

int bellsim_config_is_reanalysis(const bellsim_config *cfg) { return cfg && cfg->cfg.counts_file ? 1 : 0; }

bellsim_status bellsim_config_name(const bellsim_config *cfg, char **out) {
    return guard([&] {
        require(cfg, "config");
        require(out, "out");
        *out = dup_string(cfg->cfg.name);
    });
}

bellsim_status bellsim_run(const bellsim_config *cfg, int reveal_hidden, bellsim_result **out) {
    return guard([&] {
        require(cfg, "config");
        require(out, "out");
        auto r = std::make_unique<bellsim_result>();
        r->title = cfg->cfg.name;
        bellsim::CoincidenceTable table;
        if (cfg->cfg.counts_file) {
            table = bellsim::load_table(*cfg->cfg.counts_file);
        } else {
            bellsim::RunOptions opts;
            opts.reveal_hidden = reveal_hidden != 0;
            auto run = bellsim::run_experiment(cfg->cfg.run, opts);
            r->records = std::move(run.records);
            table = std::move(run.table);
            for (const auto &spec : cfg->cfg.scans) {
                auto alphas = bellsim::even_scan_angles(spec.points);
                r->scans.push_back(
                    bellsim::run_fringe_scan(cfg->cfg.run, spec.label, spec.beta_deg, alphas, spec.trials_per_point));
            }
        }
        r->analysis = bellsim::analyze(table, r->scans);
        *out = r.release();
    });
}

bellsim_status bellsim_analyze_file(const char *path, bellsim_result **out) {
    return guard([&] {
        require(path, "path");
        require(out, "out");
        auto r = std::make_unique<bellsim_result>();
        r->title = std::filesystem::path(path).stem().string();
        r->analysis = bellsim::analyze(bellsim::load_table(path));
        *out = r.release();
    });
}

bellsim_status bellsim_witness_files(const char *const *paths, size_t count, bellsim_result **out) {
    return guard([&] {
        require(out, "out");
        if (count < 2 || count > 3) {
            throw bellsim::InvalidArgument("the witness needs two or three fringe scans, got " + std::to_string(count));
        }
        require(paths, "paths");
        auto r = std::make_unique<bellsim_result>();
        r->title = "witness";
        for (size_t i = 0; i < count; ++i) {
            require(paths[i], "scan path");
            r->scans.push_back(bellsim::load_scan(paths[i]));
        }
        r->analysis = bellsim::analyze({}, r->scans);
        *out = r.release();
    });
}

void bellsim_result_free(bellsim_result *result) { delete result; }

bellsim_status bellsim_result_report(const bellsim_result *result, char **out) {
    return guard([&] {
        require(result, "result");
        require(out, "out");
        *out = dup_string(bellsim::format_report(result->analysis, result->title));
    });
}

bellsim_status bellsim_result_bell(const bellsim_result *result, bellsim_bell *out) {
    return guard([&] {
        require(result, "result");
        require(out, "out");
        if (!result->analysis.bell) {
            throw bellsim::InvalidArgument("result has no CHSH estimate: the settings do not form a CHSH design");
        }
        const auto &b = *result->analysis.bell;
        for (size_t i = 0; i < 4; ++i) {
            out->E[i] = b.E[i];
            out->sigma_E[i] = b.sigma_E[i];
            out->signs[i] = b.signs[i];
        }
        out->S = b.S;
        out->sigma_S = b.sigma_S;
        out->success_probability = b.success_probability;
        out->super_quantum = b.super_quantum ? 1 : 0;
    });
}

size_t bellsim_result_witness_count(const bellsim_result *result) {
    return result ? result->analysis.witnesses.size() : 0;
}

bellsim_status bellsim_result_witness(const bellsim_result *result, size_t index, bellsim_witness *out) {
    return guard([&] {
        require(result, "result");
        require(out, "out");
        if (index >= result->analysis.witnesses.size()) {
            throw bellsim::InvalidArgument("witness index out of range");
        }
        const auto &w = result->analysis.witnesses[index];
        out->components = w.components.size();
        out->total = w.total;
        out->sigma_total = w.sigma_total;
        out->bound = w.bound;
        out->violated = w.violated ? 1 : 0;
    });
}

bellsim_status bellsim_result_write_log(const bellsim_result *result, const char *path) {
    return guard([&] {
        require(result, "result");
        require(path, "path");
        if (result->records.empty()) {
            throw bellsim::InvalidArgument("result holds no trial records");
        }
        auto out = open_out(path);
        bellsim::write_trial_log(out, result->records);
        finish(out, path);
    });
}

bellsim_status bellsim_result_write_counts(const bellsim_result *result, const char *path) {
    return guard([&] {
        require(result, "result");
        require(path, "path");
        auto out = open_out(path);
        bellsim::write_counts(out, result->analysis.table);
        finish(out, path);
    });
}

size_t bellsim_result_scan_count(const bellsim_result *result) { return result ? result->scans.size() : 0; }

bellsim_status bellsim_result_scan_label(const bellsim_result *result, size_t index, char **out) {
    return guard([&] {
        require(result, "result");
        require(out, "out");
        if (index >= result->scans.size()) {
            throw bellsim::InvalidArgument("scan index out of range");
        }
        *out = dup_string(result->scans[index].label);
    });
}

bellsim_status bellsim_result_write_scan(const bellsim_result *result, size_t index, const char *path) {
    return guard([&] {
        require(result, "result");
        require(path, "path");
        if (index >= result->scans.size()) {
            throw bellsim::InvalidArgument("scan index out of range");
        }
        auto out = open_out(path);
        bellsim::write_scan(out, result->scans[index]);
        finish(out, path);
    });
}

bellsim_status bellsim_sweep_run(const bellsim_config *cfg, const double *thresholds, size_t count,
                                 bellsim_sweep **out) {
    return guard([&] {
        require(cfg, "config");
        require(out, "out");
        if (cfg->cfg.counts_file) {
            throw bellsim::InvalidArgument("a reanalysis config cannot drive a sweep");
        }
        std::vector<double> grid;
        if (count > 0) {
            require(thresholds, "thresholds");
            grid.assign(thresholds, thresholds + count);
        } else if (!cfg->cfg.sweep.thresholds.empty()) {
            grid = cfg->cfg.sweep.thresholds;
        } else {
            const auto &s = cfg->cfg.sweep;
            grid = bellsim::default_sweep_thresholds(s.points, s.min_success_probability, s.side);
        }
        auto r = std::make_unique<bellsim_sweep>();
        r->title = cfg->cfg.name;
        r->sweep = bellsim::threshold_sweep(cfg->cfg.run, grid);
        *out = r.release();
    });
}

void bellsim_sweep_free(bellsim_sweep *sweep) { delete sweep; }

size_t bellsim_sweep_row_count(const bellsim_sweep *sweep) { return sweep ? sweep->sweep.rows.size() : 0; }

bellsim_status bellsim_sweep_get_row(const bellsim_sweep *sweep, size_t index, bellsim_sweep_row *out) {
    return guard([&] {
        require(sweep, "sweep");
        require(out, "out");
        if (index >= sweep->sweep.rows.size()) {
            throw bellsim::InvalidArgument("sweep row index out of range");
        }
        const auto &row = sweep->sweep.rows[index];
        out->threshold = row.threshold;
        out->success_probability = row.success_probability;
        out->sigma_success_probability = row.sigma_success_probability;
        out->S = row.bell.S;
        out->sigma_S = row.bell.sigma_S;
    });
}

bellsim_status bellsim_sweep_report(const bellsim_sweep *sweep, char **out) {
    return guard([&] {
        require(sweep, "sweep");
        require(out, "out");
        *out = dup_string(bellsim::format_sweep_report(sweep->sweep, sweep->title));
    });
}

bellsim_status bellsim_sweep_write_series(const bellsim_sweep *sweep, const char *path) {
    return guard([&] {
        require(sweep, "sweep");
        require(path, "path");
        auto out = open_out(path);
        bellsim::write_series(out, sweep->sweep);
        finish(out, path);
    });
}

bellsim_status bellsim_serve(const bellsim_config *cfg, const char *host, int port, const char *ui_dir,
                             bellsim_ready_fn on_ready, void *user) {
    return guard([&] {
        require(cfg, "config");
        if (cfg->cfg.counts_file) {
            throw bellsim::InvalidArgument("a reanalysis config cannot drive observer sessions");
        }
        bellsim::ServiceOptions opts;
        opts.host = host ? host : cfg->cfg.service.host;
        opts.port = port >= 0 ? port : cfg->cfg.service.port;
        opts.pacing_ms = cfg->cfg.service.pacing_ms;
        if (ui_dir != nullptr) {
            opts.ui_dir = ui_dir;
        }
        bellsim::ObserverService service(cfg->cfg.run, opts);
        int bound = service.bind();
        if (on_ready != nullptr) {
            on_ready(bound, user);
        }
        service.run();
    });
}

}  // extern "C"
