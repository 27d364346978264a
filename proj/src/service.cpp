#include "bellsim/service.hpp"

#include <chrono>
#include <map>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "bellsim/error.hpp"
#include "bellsim/report.hpp"

namespace bellsim {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

void send_json(httplib::Response &res, int status, const json &body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::not_found:
            return 404;
        case ErrorCode::stale_trial:
            return 409;
        case ErrorCode::insufficient_data:
            return 422;
        case ErrorCode::invalid_argument:
        case ErrorCode::parse:
            return 400;
        default:
            return 500;
    }
}

}  // namespace

struct ObserverService::Impl {
    ServiceOptions opts;
    SessionRegistry registry;
    httplib::Server server;
    int port = -1;

    // run() and stop() may race; whichever comes second sees the other's flag.
    std::mutex life_mu;
    bool started = false;
    bool stopping = false;

    std::mutex pace_mu;
    std::map<std::string, Clock::time_point> last_prompt;

    Impl(RunConfig cfg, ServiceOptions o) : opts(std::move(o)), registry(std::move(cfg)) {}

    template <typename F>
    void guarded(httplib::Response &res, F &&f) {
        try {
            f();
        } catch (const Error &e) {
            send_json(res, status_for(e.code()), json{{"error", e.what()}});
        } catch (const json::exception &e) {
            send_json(res, 400, json{{"error", std::string("malformed request body: ") + e.what()}});
        } catch (const std::exception &e) {
            send_json(res, 500, json{{"error", e.what()}});
        }
    }

    void pace(const std::string &id) {
        if (opts.pacing_ms <= 0.0) {
            return;
        }
        auto gap = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double, std::milli>(opts.pacing_ms));
        Clock::time_point due;
        {
            std::lock_guard lock(pace_mu);
            auto it = last_prompt.find(id);
            due = it == last_prompt.end() ? Clock::now() : it->second + gap;
            last_prompt[id] = std::max(due, Clock::now());
        }
        std::this_thread::sleep_until(due);
    }

    void routes() {
        // No SO_REUSEPORT: a second service on the same port must fail, not
        // split the sessions between two registries.
        server.set_socket_options([](socket_t sock) {
            int yes = 1;
            setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
        });
        auto new_session = [this](const httplib::Request &, httplib::Response &res) {
            guarded(res, [&] { send_json(res, 200, json{{"session_id", registry.create()->id()}}); });
        };
        server.Get("/session", new_session);
        server.Post("/session", new_session);

        server.Get(R"(/session/([^/]+)/trial)", [this](const httplib::Request &req, httplib::Response &res) {
            guarded(res, [&] {
                auto session = registry.get(req.matches[1]);
                if (session->complete()) {
                    send_json(res, 410, json{{"error", "session complete"}});
                    return;
                }
                pace(session->id());
                auto prompt = session->next_trial();
                if (!prompt) {
                    send_json(res, 410, json{{"error", "session complete"}});
                    return;
                }
                send_json(res, 200,
                          json{{"trial_id", prompt->trial_id},
                               {"left_brightness", prompt->left_brightness},
                               {"right_brightness", prompt->right_brightness}});
            });
        });

        server.Post(R"(/session/([^/]+)/answer)", [this](const httplib::Request &req, httplib::Response &res) {
            guarded(res, [&] {
                auto session = registry.get(req.matches[1]);
                json body = json::parse(req.body);
                if (!body.is_object() || !body.contains("trial_id") || !body.contains("verdict")) {
                    throw InvalidArgument("answer needs trial_id and verdict");
                }
                if (!body.at("trial_id").is_number_unsigned()) {
                    throw InvalidArgument("trial_id must be a non-negative integer");
                }
                auto id = body.at("trial_id").get<std::uint64_t>();
                Verdict v = parse_observer_answer(body.at("verdict").get<std::string>());
                send_json(res, 200, json{{"status", to_string(session->answer(id, v))}});
            });
        });

        server.Get(R"(/session/([^/]+)/results)", [this](const httplib::Request &req, httplib::Response &res) {
            guarded(res, [&] { send_json(res, 200, bell_to_json(registry.get(req.matches[1])->results())); });
        });

        if (!opts.ui_dir.empty() && !server.set_mount_point("/ui", opts.ui_dir.string())) {
            throw IoError("cannot serve UI directory " + opts.ui_dir.string());
        }
    }
};

ObserverService::ObserverService(RunConfig cfg, ServiceOptions opts)
    : impl_(std::make_unique<Impl>(std::move(cfg), std::move(opts))) {
    impl_->routes();
}

ObserverService::~ObserverService() { stop(); }

int ObserverService::bind() {
    if (impl_->port >= 0) {
        return impl_->port;
    }
    const auto &o = impl_->opts;
    if (o.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(o.host);
    } else {
        impl_->port = impl_->server.bind_to_port(o.host, o.port) ? o.port : -1;
    }
    if (impl_->port < 0) {
        throw IoError("cannot bind " + o.host + ":" + std::to_string(o.port));
    }
    return impl_->port;
}

void ObserverService::run() {
    bind();
    {
        std::lock_guard lock(impl_->life_mu);
        if (impl_->stopping) {
            return;
        }
        impl_->started = true;
    }
    impl_->server.listen_after_bind();
}

void ObserverService::stop() {
    if (!impl_) {
        return;
    }
    bool started = false;
    {
        std::lock_guard lock(impl_->life_mu);
        impl_->stopping = true;
        started = impl_->started;
    }
    if (started) {
        impl_->server.wait_until_ready();
        impl_->server.stop();
    }
}

SessionRegistry &ObserverService::sessions() noexcept { return impl_->registry; }

}  // namespace bellsim
