#include <doctest.h>

#include <filesystem>
#include <string>

#include "bellsim/config.hpp"
#include "bellsim/error.hpp"

using namespace bellsim;
using doctest::Approx;

namespace fs = std::filesystem;

TEST_CASE("every shipped preset loads") {
    int count = 0;
    for (const auto &entry : fs::directory_iterator(BELLSIM_CONFIG_DIR)) {
        if (entry.path().extension() != ".cfg") {
            continue;
        }
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_config(entry.path()));
        ++count;
    }
    CHECK(count >= 6);
}

TEST_CASE("photodiode preset") {
    Config c = load_config(fs::path(BELLSIM_CONFIG_DIR) / "paper_photodiode.cfg");
    CHECK(c.name == "paper_photodiode");
    CHECK(c.run.source.t_z == Approx(0.8419468).epsilon(1e-6));
    CHECK(c.run.source.t_x == Approx(0.9456194).epsilon(1e-6));
    const auto &t = std::get<ThresholdConfig>(c.run.detection);
    CHECK(threshold_success_probability(t.threshold) == Approx(0.2));
    CHECK(c.run.trials_per_setting == 5000);
    CHECK(c.run.settings.size() == 4);
    CHECK(c.run.cloner.detector_efficiency == Approx(0.07));
    CHECK(c.sweep.points == 21);
}

TEST_CASE("human observer preset") {
    Config c = load_config(fs::path(BELLSIM_CONFIG_DIR) / "human_observer.cfg");
    const auto &m = std::get<ObserverModel>(c.run.detection);
    CHECK(m.discrimination_gap == Approx(0.8647).epsilon(1e-4));
    CHECK(c.run.block_length == 250);
    CHECK(c.run.trials_per_setting == 1000);
    CHECK(c.service.port == 8765);
}

TEST_CASE("reanalysis preset resolves the counts file next to it") {
    Config c = load_config(fs::path(BELLSIM_CONFIG_DIR) / "table1_reanalysis.cfg");
    REQUIRE(c.counts_file.has_value());
    CHECK(fs::exists(*c.counts_file));
    CHECK(c.counts_file->filename() == "table1_counts.txt");
}

TEST_CASE("comments and explicit settings") {
    auto c = parse_config(R"({
        // settings in degrees
        "seed": 9,
        "source": { "t_z": 0.5, "t_x": 0.25 },
        "detection": { "mode": "threshold", "threshold": 0.3, "threshold_minus": 0.35, "analog_noise_sigma": 0.01 },
        "schedule": { "settings_deg": [[0, 0], [45, "circular"]], "trials_per_setting": 10, "block_length": 5 },
        "scans": [ { "label": "HV", "beta_deg": 0 } ]
    })");
    CHECK(c.run.seed == 9);
    CHECK(c.run.source.t_x == 0.25);
    REQUIRE(c.run.settings.size() == 2);
    CHECK(c.run.settings[1].b.is_circular());
    const auto &t = std::get<ThresholdConfig>(c.run.detection);
    CHECK(t.minus_threshold() == 0.35);
    CHECK(t.analog_noise_sigma == 0.01);
    REQUIRE(c.scans.size() == 1);
    CHECK(c.scans[0].points == 13);
}

TEST_CASE("two observers with drift") {
    auto c = parse_config(R"({
        "detection": { "mode": "two_observers",
                       "plus_arm": { "gap": 0.2, "drift_amplitude": 0.3, "drift_period_trials": 997 },
                       "minus_arm": { "gap": 0.2, "drift_amplitude": 0.3, "drift_period_trials": 1601,
                                      "drift_phase_rad": 1.0 } },
        "schedule": { "preset": "chsh", "trials_per_setting": 10 }
    })");
    const auto &two = std::get<TwoObservers>(c.run.detection);
    CHECK(two.plus_arm.drift_period == 997);
    CHECK(two.minus_arm.drift_phase == 1.0);
}

TEST_CASE("malformed and invalid configs are rejected with a message") {
    CHECK_THROWS_WITH_AS(parse_config("{ \"schedule\": "), doctest::Contains("malformed config"), ParseError);
    CHECK_THROWS_WITH_AS(parse_config(R"({ "schedul": {} })"), doctest::Contains("unknown key 'schedul'"),
                         ParseError);
    CHECK_THROWS_AS(parse_config(R"({ "source": { "t_z": 1 } })"), ParseError);  // no schedule
    CHECK_THROWS_AS(parse_config(R"({ "detection": { "mode": "photon" }, "schedule": { "preset": "chsh" } })"),
                    ParseError);
    CHECK_THROWS_AS(parse_config(R"({ "detection": { "threshold": 0.3, "success_probability": 0.2 },
                                      "schedule": { "preset": "chsh" } })"),
                    ParseError);
    CHECK_THROWS_AS(parse_config(R"({ "source": { "t_z": 1.5 }, "schedule": { "preset": "chsh" } })"),
                    InvalidArgument);
    CHECK_THROWS_AS(parse_config(R"({ "schedule": { "preset": "chsh", "trials_per_setting": -4 } })"),
                    InvalidArgument);
    CHECK_THROWS_AS(parse_config(R"({ "schedule": { "settings_deg": [[0]] } })"), ParseError);
    CHECK_THROWS_AS(parse_config(R"({ "source": { "calibrate_visibilities": { "v_hv": 0.9, "v_pm": 0.5 } },
                                      "schedule": { "preset": "chsh" } })"),
                    InvalidArgument);
    CHECK_THROWS_AS(load_config("/nonexistent/run.cfg"), IoError);
}
