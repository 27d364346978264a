#include "bellsim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bellsim/error.hpp"
#include "bellsim/sweep.hpp"

namespace bellsim {

namespace {

using nlohmann::json;

void expect_keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed) {
    if (!obj.is_object()) {
        throw ParseError(where + " must be an object");
    }
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto &[key, value] : obj.items()) {
        if (!ok.contains(key)) {
            throw ParseError("unknown key '" + key + "' in " + where);
        }
    }
}

double number(const json &obj, const char *key, const std::string &where, std::optional<double> fallback = {}) {
    if (!obj.contains(key)) {
        if (fallback) {
            return *fallback;
        }
        throw ParseError(where + "." + key + " is required");
    }
    const json &v = obj.at(key);
    if (v.is_string() && (v.get<std::string>() == "inf" || v.get<std::string>() == "infinity")) {
        return std::numeric_limits<double>::infinity();
    }
    if (!v.is_number()) {
        throw ParseError(where + "." + key + " must be a number");
    }
    return v.get<double>();
}

std::uint64_t count(const json &obj, const char *key, const std::string &where, std::optional<std::uint64_t> fallback) {
    if (!obj.contains(key)) {
        if (fallback) {
            return *fallback;
        }
        throw ParseError(where + "." + key + " is required");
    }
    const json &v = obj.at(key);
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
        throw InvalidArgument(where + "." + key + " must be non-negative");
    }
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        throw ParseError(where + "." + key + " must be a non-negative integer");
    }
    return v.get<std::uint64_t>();
}

std::string text(const json &obj, const char *key, const std::string &where, std::optional<std::string> fallback) {
    if (!obj.contains(key)) {
        if (fallback) {
            return *fallback;
        }
        throw ParseError(where + "." + key + " is required");
    }
    if (!obj.at(key).is_string()) {
        throw ParseError(where + "." + key + " must be a string");
    }
    return obj.at(key).get<std::string>();
}

ThresholdSide parse_side(const std::string &s) {
    if (s == "low") {
        return ThresholdSide::low;
    }
    if (s == "high") {
        return ThresholdSide::high;
    }
    throw ParseError("threshold side must be 'low' or 'high', got '" + s + "'");
}

Basis parse_basis(const json &v, const std::string &where) {
    if (v.is_number()) {
        return Basis::linear_degrees(v.get<double>());
    }
    if (v.is_string() && v.get<std::string>() == "circular") {
        return Basis::circular();
    }
    throw ParseError(where + " must be an angle in degrees or \"circular\"");
}

PairSource parse_source(const json &j) {
    const std::string where = "source";
    expect_keys(j, where, {"t_z", "t_x", "calibrate_visibilities"});
    if (j.contains("calibrate_visibilities")) {
        if (j.contains("t_z") || j.contains("t_x")) {
            throw ParseError("source: give either t_z/t_x or calibrate_visibilities, not both");
        }
        const json &c = j.at("calibrate_visibilities");
        expect_keys(c, "source.calibrate_visibilities", {"v_hv", "v_pm"});
        return calibrate_source(number(c, "v_hv", "source.calibrate_visibilities"),
                                number(c, "v_pm", "source.calibrate_visibilities"));
    }
    PairSource src;
    src.t_z = number(j, "t_z", where, 1.0);
    src.t_x = number(j, "t_x", where, 1.0);
    return src;
}

ObserverModel parse_observer(const json &j, const std::string &where) {
    expect_keys(j, where,
                {"gap", "success_probability", "drift_amplitude", "drift_period_trials", "drift_phase_rad", "mode"});
    ObserverModel m;
    if (j.contains("success_probability")) {
        if (j.contains("gap")) {
            throw ParseError(where + ": give either gap or success_probability, not both");
        }
        m.discrimination_gap = observer_gap_for_success_probability(number(j, "success_probability", where));
    } else {
        m.discrimination_gap = number(j, "gap", where);
    }
    m.drift_amplitude = number(j, "drift_amplitude", where, 0.0);
    m.drift_period = number(j, "drift_period_trials", where, 0.0);
    m.drift_phase = number(j, "drift_phase_rad", where, 0.0);
    return m;
}

DetectionModel parse_detection(const json &j) {
    const std::string where = "detection";
    if (!j.is_object()) {
        throw ParseError("detection must be an object");
    }
    std::string mode = text(j, "mode", where, std::string("threshold"));
    if (mode == "threshold") {
        expect_keys(j, where,
                    {"mode", "threshold", "threshold_minus", "success_probability", "side", "analog_noise_sigma"});
        ThresholdConfig t;
        if (j.contains("success_probability")) {
            if (j.contains("threshold")) {
                throw ParseError("detection: give either threshold or success_probability, not both");
            }
            t.threshold = threshold_for_success_probability(number(j, "success_probability", where),
                                                            parse_side(text(j, "side", where, std::string("low"))));
        } else {
            t.threshold = number(j, "threshold", where, 0.5);
        }
        if (j.contains("threshold_minus")) {
            t.threshold_minus = number(j, "threshold_minus", where);
        }
        t.analog_noise_sigma = number(j, "analog_noise_sigma", where, 0.0);
        return t;
    }
    if (mode == "observer") {
        return parse_observer(j, where);
    }
    if (mode == "two_observers") {
        expect_keys(j, where, {"mode", "plus_arm", "minus_arm"});
        if (!j.contains("plus_arm") || !j.contains("minus_arm")) {
            throw ParseError("detection: two_observers needs plus_arm and minus_arm");
        }
        return TwoObservers{parse_observer(j.at("plus_arm"), "detection.plus_arm"),
                            parse_observer(j.at("minus_arm"), "detection.minus_arm")};
    }
    throw ParseError("detection.mode must be threshold, observer or two_observers, got '" + mode + "'");
}

void parse_schedule(const json &j, RunConfig &run) {
    const std::string where = "schedule";
    expect_keys(j, where, {"trials_per_setting", "block_length", "settings_deg", "preset"});
    run.trials_per_setting = count(j, "trials_per_setting", where, 5000);
    run.block_length = count(j, "block_length", where, 0);
    if (j.contains("preset")) {
        if (j.contains("settings_deg")) {
            throw ParseError("schedule: give either preset or settings_deg, not both");
        }
        std::string preset = text(j, "preset", where, {});
        if (preset != "chsh") {
            throw ParseError("schedule.preset must be 'chsh', got '" + preset + "'");
        }
        run.settings = chsh_settings();
    } else {
        if (!j.contains("settings_deg") || !j.at("settings_deg").is_array()) {
            throw ParseError("schedule.settings_deg must be an array of [alpha, beta] pairs");
        }
        for (const auto &pair : j.at("settings_deg")) {
            if (!pair.is_array() || pair.size() != 2) {
                throw ParseError("schedule.settings_deg entries must be [alpha, beta] pairs");
            }
            run.settings.push_back(Setting{parse_basis(pair[0], "settings_deg alpha"),
                                           parse_basis(pair[1], "settings_deg beta")});
        }
    }
}

}  // namespace

Config parse_config(std::string_view input, const std::filesystem::path &base_dir) {
    json j;
    try {
        j = json::parse(input.begin(), input.end(), nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error &e) {
        throw ParseError(std::string("malformed config: ") + e.what());
    }
    expect_keys(j, "config",
                {"name", "seed", "source", "cloner", "detection", "a_efficiency", "schedule", "scans", "sweep",
                 "service", "counts_file", "threads"});

    Config cfg;
    try {
        cfg.name = text(j, "name", "config", std::string{});
        if (j.contains("counts_file")) {
            cfg.counts_file = base_dir / text(j, "counts_file", "config", {});
            return cfg;
        }

        RunConfig &run = cfg.run;
        run.seed = count(j, "seed", "config", 1);
        run.threads = static_cast<unsigned>(count(j, "threads", "config", 0));
        if (j.contains("source")) {
            run.source = parse_source(j.at("source"));
        }
        if (j.contains("cloner")) {
            const json &c = j.at("cloner");
            expect_keys(c, "cloner", {"detector_efficiency", "dark_click_rate"});
            run.cloner.detector_efficiency = number(c, "detector_efficiency", "cloner", 0.07);
            run.cloner.dark_click_rate = number(c, "dark_click_rate", "cloner", 0.0);
        }
        if (j.contains("detection")) {
            run.detection = parse_detection(j.at("detection"));
        }
        run.a_efficiency = number(j, "a_efficiency", "config", 1.0);
        if (!j.contains("schedule")) {
            throw ParseError("config.schedule is required");
        }
        parse_schedule(j.at("schedule"), run);

        if (j.contains("scans")) {
            if (!j.at("scans").is_array()) {
                throw ParseError("scans must be an array");
            }
            for (const auto &s : j.at("scans")) {
                expect_keys(s, "scans[]", {"label", "beta_deg", "points", "trials_per_point"});
                ScanSpec spec;
                spec.label = text(s, "label", "scans[]", {});
                spec.beta_deg = number(s, "beta_deg", "scans[]");
                spec.points = count(s, "points", "scans[]", 13);
                spec.trials_per_point = count(s, "trials_per_point", "scans[]", 1000);
                cfg.scans.push_back(spec);
            }
        }
        if (j.contains("sweep")) {
            const json &s = j.at("sweep");
            expect_keys(s, "sweep", {"points", "min_success_probability", "side", "thresholds"});
            cfg.sweep.points = count(s, "points", "sweep", 21);
            cfg.sweep.min_success_probability = number(s, "min_success_probability", "sweep", 0.05);
            cfg.sweep.side = parse_side(text(s, "side", "sweep", std::string("low")));
            if (s.contains("thresholds")) {
                for (const auto &t : s.at("thresholds")) {
                    if (!t.is_number()) {
                        throw ParseError("sweep.thresholds must be numbers");
                    }
                    cfg.sweep.thresholds.push_back(t.get<double>());
                }
            }
        }
        if (j.contains("service")) {
            const json &s = j.at("service");
            expect_keys(s, "service", {"host", "port", "pacing_ms"});
            cfg.service.host = text(s, "host", "service", cfg.service.host);
            cfg.service.port = static_cast<int>(count(s, "port", "service", 8765));
            cfg.service.pacing_ms = number(s, "pacing_ms", "service", 0.0);
        }
    } catch (const json::exception &e) {
        throw ParseError(std::string("malformed config: ") + e.what());
    }
    cfg.run.validate();
    return cfg;
}

Config load_config(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config file " + path.string());
    }
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.parent_path());
}

}  // namespace bellsim
