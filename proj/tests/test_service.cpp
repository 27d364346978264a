#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bellsim/config.hpp"
#include "bellsim/error.hpp"
#include "bellsim/report.hpp"
#include "bellsim/service.hpp"
#include "bellsim/sweep.hpp"
#include "oracles.hpp"

using namespace bellsim;
using doctest::Approx;
using nlohmann::json;

namespace fs = std::filesystem;

namespace {

RunConfig small_config(std::uint64_t trials = 200) {
    RunConfig cfg;
    cfg.settings = chsh_settings();
    cfg.trials_per_setting = trials;
    cfg.block_length = 50;
    cfg.seed = 321;
    cfg.source = calibrate_source(0.536, 0.602);
    cfg.detection = ObserverModel{0.5};
    return cfg;
}

// Scripted observer: a fixed brightness gap, seeing only the two spots.
Verdict gap_observer(const TrialPrompt &p, double gap) {
    if (p.left_brightness - p.right_brightness > gap) {
        return Verdict::plus;
    }
    if (p.right_brightness - p.left_brightness > gap) {
        return Verdict::minus;
    }
    return Verdict::inconclusive;
}

void drive(ObserverSession &s, double gap) {
    while (auto p = s.next_trial()) {
        REQUIRE(s.answer(p->trial_id, gap_observer(*p, gap)) == AnswerStatus::accepted);
    }
}

struct RunningService {
    ObserverService service;
    int port;
    std::thread thread;

    explicit RunningService(RunConfig cfg)
        : service(std::move(cfg), ServiceOptions{"127.0.0.1", 0, 0.0, {}}), port(service.bind()),
          thread([this] { service.run(); }) {}
    ~RunningService() {
        service.stop();
        thread.join();
    }
};

json body(const httplib::Result &r) { return json::parse(r->body); }

}  // namespace

TEST_CASE("answer parsing") {
    CHECK(parse_observer_answer("LEFT") == Verdict::plus);
    CHECK(parse_observer_answer("RIGHT") == Verdict::minus);
    CHECK(parse_observer_answer("INCONCLUSIVE") == Verdict::inconclusive);
    CHECK_THROWS_AS(parse_observer_answer("left"), InvalidArgument);
    CHECK_THROWS_AS(parse_observer_answer(""), InvalidArgument);
}

TEST_CASE("session answers: accepted, duplicate, stale") {
    ObserverSession s("s1", small_config(10));
    CHECK(s.total_trials() == 40);
    CHECK_THROWS_AS(s.answer(0, Verdict::plus), StaleTrial);  // nothing shown yet
    auto p = s.next_trial();
    REQUIRE(p);
    CHECK(p->trial_id == 0);
    auto again = s.next_trial();  // asking twice shows the same trial
    CHECK(again->trial_id == 0);
    CHECK(again->left_brightness == p->left_brightness);
    CHECK_THROWS_AS(s.answer(5, Verdict::plus), StaleTrial);
    CHECK(s.answer(0, Verdict::plus) == AnswerStatus::accepted);
    CHECK(s.answer(0, Verdict::minus) == AnswerStatus::duplicate);
    CHECK(s.answers().size() == 1);
    CHECK(s.answers()[0].second == Verdict::plus);
    CHECK(s.next_trial()->trial_id == 1);
    CHECK(s.answered() == 1);
}

TEST_CASE("prompts carry brightness in [0, 1] only") {
    ObserverSession s("s1", small_config(20));
    while (auto p = s.next_trial()) {
        CHECK(p->left_brightness >= 0.0);
        CHECK(p->left_brightness <= 1.0);
        CHECK(p->right_brightness >= 0.0);
        CHECK(p->right_brightness <= 1.0);
        s.answer(p->trial_id, Verdict::inconclusive);
    }
    CHECK(s.complete());
    CHECK_FALSE(s.next_trial().has_value());
    CHECK_THROWS_AS(s.results(), InsufficientData);
}

TEST_CASE("a scripted observer reproduces the batch observer model") {
    RunConfig cfg = small_config(400);
    ObserverSession s("s1", cfg);
    drive(s, 0.5);
    auto batch = run_experiment(cfg, RunOptions{false, false});
    CoincidenceTable live = s.table();
    REQUIRE(live.settings.size() == batch.table.settings.size());
    for (const auto &t : batch.table.settings) {
        const SettingTally *l = live.find(t.setting);
        REQUIRE(l != nullptr);
        CHECK(l->cells == t.cells);
        CHECK(l->conclusive == t.conclusive);
        CHECK(l->trials == t.trials);
    }
    CHECK(s.results().S == chsh(batch.table).S);
}

TEST_CASE("replaying the answer stream gives the same estimate") {
    RunConfig cfg = small_config(300);
    ObserverSession first("s1", cfg);
    drive(first, 0.6);
    ObserverSession second("s2", cfg);
    for (const auto &[id, v] : first.answers()) {
        auto p = second.next_trial();
        REQUIRE(p->trial_id == id);
        second.answer(id, v);
    }
    auto a = first.results();
    auto b = second.results();
    CHECK(a.S == b.S);
    CHECK(a.sigma_S == b.sigma_S);
    CHECK(a.E == b.E);
}

TEST_CASE("random answers carry no correlation") {
    ObserverSession s("s1", small_config(2000));
    Rng coin(99);
    while (auto p = s.next_trial()) {
        s.answer(p->trial_id, coin.bernoulli(0.5) ? Verdict::plus : Verdict::minus);
    }
    auto est = s.results();
    CHECK(std::fabs(est.S) < 4 * est.sigma_S);
    CHECK(est.success_probability == 1.0);
}

TEST_CASE("observer at the recorded success probability violates the bound") {
    Config c = load_config(fs::path(BELLSIM_CONFIG_DIR) / "human_observer.cfg");
    c.run.trials_per_setting = 5000;
    double gap = std::get<ObserverModel>(c.run.detection).discrimination_gap;
    ObserverSession s("s1", c.run);
    drive(s, gap);
    auto est = s.results();
    double expect = oracle::chsh(c.run.source.t_z, c.run.source.t_x, oracle::gap_rule(gap));
    CHECK(std::fabs(est.S - expect) < 4 * est.sigma_S);
    CHECK(est.S > 2.25);
    CHECK(est.S < 2.5);
    CHECK(est.success_probability == Approx(0.335).epsilon(0.03));
}

TEST_CASE("registry seeds and lookup") {
    SessionRegistry reg(small_config(10));
    auto a = reg.create();
    auto b = reg.create();
    CHECK(a->id() == "s1");
    CHECK(b->id() == "s2");
    CHECK(a->config().seed == 321);
    CHECK(b->config().seed != 321);
    CHECK(reg.get("s2") == b);
    CHECK_THROWS_AS(reg.get("s9"), NotFound);
    CHECK(reg.size() == 2);
}

TEST_CASE("HTTP endpoints") {
    RunningService svc(small_config(5));
    httplib::Client cli("127.0.0.1", svc.port);

    auto created = cli.Post("/session");
    REQUIRE(created);
    CHECK(created->status == 200);
    std::string id = body(created)["session_id"];
    CHECK(id == "s1");

    auto trial = cli.Get("/session/" + id + "/trial");
    REQUIRE(trial);
    CHECK(trial->status == 200);
    json t = body(trial);
    CHECK(t.size() == 3);
    CHECK(t.contains("trial_id"));
    CHECK(t.contains("left_brightness"));
    CHECK(t.contains("right_brightness"));

    auto answer = [&](std::uint64_t trial_id, const std::string &verdict) {
        json req{{"trial_id", trial_id}, {"verdict", verdict}};
        return cli.Post("/session/" + id + "/answer", req.dump(), "application/json");
    };
    auto ok = answer(t["trial_id"], "LEFT");
    CHECK(ok->status == 200);
    CHECK(body(ok)["status"] == "accepted");
    auto dup = answer(t["trial_id"], "RIGHT");
    CHECK(dup->status == 200);
    CHECK(body(dup)["status"] == "duplicate");
    auto stale = answer(7, "LEFT");
    CHECK(stale->status == 409);
    CHECK(body(stale).contains("error"));
    auto bad = answer(1, "SIDEWAYS");
    CHECK(bad->status == 400);
    auto garbage = cli.Post("/session/" + id + "/answer", "{not json", "application/json");
    CHECK(garbage->status == 400);

    CHECK(cli.Get("/session/nope/trial")->status == 404);
    CHECK(cli.Get("/session/nope/results")->status == 404);

    auto early = cli.Get("/session/" + id + "/results");
    CHECK(early->status == 422);

    // Answer everything with the gap rule, then read results.
    for (;;) {
        auto r = cli.Get("/session/" + id + "/trial");
        REQUIRE(r);
        if (r->status == 410) {
            CHECK(body(r)["error"] == "session complete");
            break;
        }
        json p = body(r);
        double d = p["left_brightness"].get<double>() - p["right_brightness"].get<double>();
        answer(p["trial_id"], d > 0 ? "LEFT" : "RIGHT");
    }
    auto results = cli.Get("/session/" + id + "/results");
    REQUIRE(results);
    CHECK(results->status == 200);
    json r = body(results);
    CHECK(r.size() == 5);
    for (const char *k : {"E", "sigma_E", "S", "sigma_S", "success_probability"}) {
        CHECK(r.contains(k));
    }
    auto direct = bell_to_json(svc.service.sessions().get(id)->results());
    CHECK(r == direct);

    auto second = cli.Get("/session");
    CHECK(body(second)["session_id"] == "s2");
}

TEST_CASE("bind failures are reported") {
    RunningService first(small_config(5));
    ObserverService clash(small_config(5), ServiceOptions{"127.0.0.1", first.port, 0.0, {}});
    CHECK_THROWS_AS(clash.bind(), IoError);
}
