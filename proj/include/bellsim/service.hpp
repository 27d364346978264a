#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "bellsim/session.hpp"

namespace bellsim {

struct ServiceOptions {
    std::string host = "127.0.0.1";
    /// 0 binds any free port; read the result from bind().
    int port = 8765;
    /// Minimum time between two prompts of one session.
    double pacing_ms = 0.0;
    /// Static files for the browser page, served under /ui when set.
    std::filesystem::path ui_dir;
};

/// Local HTTP front end for observer sessions:
///   GET  /session               -> {"session_id"}
///   GET  /session/{id}/trial    -> {"trial_id", "left_brightness", "right_brightness"}
///   POST /session/{id}/answer   {"trial_id", "verdict"} -> {"status"}
///   GET  /session/{id}/results  -> {"E", "sigma_E", "S", "sigma_S", "success_probability"}
/// Errors come back as {"error": message} with 400, 404, 409, 410 or 422.
class ObserverService {
  public:
    ObserverService(RunConfig cfg, ServiceOptions opts);
    ~ObserverService();
    ObserverService(const ObserverService &) = delete;
    ObserverService &operator=(const ObserverService &) = delete;

    /// Binds the listening socket and returns the port. Throws IoError.
    int bind();
    /// Serves until stop(). Calls bind() first if needed.
    void run();
    void stop();

    SessionRegistry &sessions() noexcept;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace bellsim
