#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bellsim/bellsim.h"

namespace fs = std::filesystem;

namespace {

struct Failure {
    bellsim_status status;
};

void check(bellsim_status s) {
    if (s != BELLSIM_OK) {
        throw Failure{s};
    }
}

template <typename T, void (*Free)(T *)>
struct Handle {
    T *p = nullptr;
    Handle() = default;
    Handle(const Handle &) = delete;
    Handle &operator=(const Handle &) = delete;
    ~Handle() { Free(p); }
    T **out() { return &p; }
    T *get() const { return p; }
};

using Config = Handle<bellsim_config, bellsim_config_free>;
using Result = Handle<bellsim_result, bellsim_result_free>;
using Sweep = Handle<bellsim_sweep, bellsim_sweep_free>;

std::string take(char *s) {
    std::string out = s ? s : "";
    bellsim_string_free(s);
    return out;
}

void load(Config &cfg, const std::string &path, std::optional<std::uint64_t> seed, unsigned threads) {
    check(bellsim_config_load(path.c_str(), cfg.out()));
    if (seed) {
        check(bellsim_config_set_seed(cfg.get(), *seed));
    }
    if (threads > 0) {
        check(bellsim_config_set_threads(cfg.get(), threads));
    }
}

fs::path prepare_out(const std::string &dir) {
    fs::path out(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) {
        std::cerr << "error: cannot create " << dir << ": " << ec.message() << '\n';
        throw Failure{BELLSIM_E_IO};
    }
    return out;
}

void write_text(const fs::path &path, const std::string &text) {
    std::FILE *f = std::fopen(path.c_str(), "w");
    if (f == nullptr || std::fwrite(text.data(), 1, text.size(), f) != text.size()) {
        if (f) {
            std::fclose(f);
        }
        std::cerr << "error: cannot write " << path << '\n';
        throw Failure{BELLSIM_E_IO};
    }
    std::fclose(f);
}

std::string safe_name(std::string label) {
    for (char &c : label) {
        bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
        if (!ok) {
            c = '_';
        }
    }
    return label;
}

void emit_report(const Result &r, const std::optional<fs::path> &out) {
    char *text = nullptr;
    check(bellsim_result_report(r.get(), &text));
    std::string report = take(text);
    std::cout << report;
    if (out) {
        write_text(*out / "report.txt", report);
    }
}

void ready(int port, void *user) {
    const auto *host = static_cast<const std::string *>(user);
    std::cout << "serving observer sessions on http://" << *host << ':' << port << '\n' << std::flush;
}

}  // namespace

int main(int argc, char **argv) {
    CLI::App app{"Bell-test detection-loophole simulator"};
    app.require_subcommand(1);
    app.set_version_flag("--version", bellsim_version());

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    bool reveal = false;
    unsigned threads = 0;

    auto *run = app.add_subcommand("run", "Simulate the configured experiment, write log, counts and report");
    run->add_option("-c,--config", config_path, "Run file")->required()->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Override the master seed");
    run->add_option("-o,--out", out_dir, "Output directory");
    run->add_flag("--reveal-hidden", reveal, "Keep the cloner angle in the trial log");
    run->add_option("--threads", threads, "Worker threads (0: all cores)");

    std::vector<double> thresholds;
    auto *sweep = app.add_subcommand("sweep", "Scan the detection threshold; S and P_s per threshold");
    sweep->add_option("-c,--config", config_path, "Run file")->required()->check(CLI::ExistingFile);
    sweep->add_option("--seed", seed, "Override the master seed");
    sweep->add_option("-o,--out", out_dir, "Output directory");
    sweep->add_option("--thresholds", thresholds, "Explicit threshold grid");
    sweep->add_option("--threads", threads, "Worker threads (0: all cores)");

    std::string input;
    auto *analyze = app.add_subcommand("analyze", "Analyze a trial log or counts file");
    analyze->add_option("input", input, "Trial log or counts file")->required()->check(CLI::ExistingFile);
    analyze->add_option("-o,--out", out_dir, "Output directory");

    std::vector<std::string> scans;
    auto *witness = app.add_subcommand("witness", "Fit fringe scans and evaluate the visibility witness");
    witness->add_option("scans", scans, "Two or three fringe-scan files")->required()->check(CLI::ExistingFile);
    witness->add_option("-o,--out", out_dir, "Output directory");

    std::optional<std::string> host;
    std::optional<int> port;
    std::optional<std::string> ui_dir;
    auto *serve = app.add_subcommand("serve", "Serve human-observer sessions over local HTTP");
    serve->add_option("-c,--config", config_path, "Run file")->required()->check(CLI::ExistingFile);
    serve->add_option("--seed", seed, "Override the master seed");
    serve->add_option("--host", host, "Listen address");
    serve->add_option("--port", port, "Listen port (0: any free port)")->check(CLI::Range(0, 65535));
    serve->add_option("--ui-dir", ui_dir, "Directory with the browser page, served under /ui")
        ->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        std::optional<fs::path> out;
        if (!out_dir.empty()) {
            out = prepare_out(out_dir);
        }

        if (*run) {
            Config cfg;
            load(cfg, config_path, seed, threads);
            Result r;
            check(bellsim_run(cfg.get(), reveal ? 1 : 0, r.out()));
            if (out) {
                if (!bellsim_config_is_reanalysis(cfg.get())) {
                    check(bellsim_result_write_log(r.get(), (*out / "trials.jsonl").c_str()));
                }
                check(bellsim_result_write_counts(r.get(), (*out / "counts.txt").c_str()));
                for (size_t i = 0; i < bellsim_result_scan_count(r.get()); ++i) {
                    char *label = nullptr;
                    check(bellsim_result_scan_label(r.get(), i, &label));
                    std::string name = "scan_" + safe_name(take(label)) + ".txt";
                    check(bellsim_result_write_scan(r.get(), i, (*out / name).c_str()));
                }
            }
            emit_report(r, out);
        } else if (*sweep) {
            Config cfg;
            load(cfg, config_path, seed, threads);
            Sweep s;
            check(bellsim_sweep_run(cfg.get(), thresholds.data(), thresholds.size(), s.out()));
            char *text = nullptr;
            check(bellsim_sweep_report(s.get(), &text));
            std::string report = take(text);
            std::cout << report;
            if (out) {
                check(bellsim_sweep_write_series(s.get(), (*out / "series.tsv").c_str()));
                write_text(*out / "sweep_report.txt", report);
            }
        } else if (*analyze) {
            Result r;
            check(bellsim_analyze_file(input.c_str(), r.out()));
            emit_report(r, out);
        } else if (*witness) {
            std::vector<const char *> paths;
            for (const auto &s : scans) {
                paths.push_back(s.c_str());
            }
            Result r;
            check(bellsim_witness_files(paths.data(), paths.size(), r.out()));
            emit_report(r, out);
        } else if (*serve) {
            Config cfg;
            load(cfg, config_path, seed, 0);
            std::string shown = host.value_or("127.0.0.1");
            check(bellsim_serve(cfg.get(), host ? host->c_str() : nullptr, port.value_or(-1),
                                ui_dir ? ui_dir->c_str() : nullptr, ready, &shown));
        }
    } catch (const Failure &f) {
        const char *msg = bellsim_last_error();
        if (msg != nullptr && *msg != '\0') {
            std::cerr << "error: " << msg << '\n';
        }
        return static_cast<int>(f.status);
    }
    return 0;
}
