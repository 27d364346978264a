#pragma once

#include <stdexcept>
#include <string>

namespace bellsim {

/// Error categories carried across the C boundary as integer codes.
enum class ErrorCode {
    invalid_argument = 1,
    parse = 2,
    io = 3,
    insufficient_data = 4,
    fit_failure = 5,
    not_found = 6,
    stale_trial = 7,
    internal = 99,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string &what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

struct InvalidArgument : Error {
    explicit InvalidArgument(const std::string &what) : Error(ErrorCode::invalid_argument, what) {}
};

struct ParseError : Error {
    explicit ParseError(const std::string &what) : Error(ErrorCode::parse, what) {}
};

struct IoError : Error {
    explicit IoError(const std::string &what) : Error(ErrorCode::io, what) {}
};

/// Raised instead of returning a silent zero when an estimator has no counts.
struct InsufficientData : Error {
    explicit InsufficientData(const std::string &what) : Error(ErrorCode::insufficient_data, what) {}
};

struct FitFailure : Error {
    explicit FitFailure(const std::string &what) : Error(ErrorCode::fit_failure, what) {}
};

struct NotFound : Error {
    explicit NotFound(const std::string &what) : Error(ErrorCode::not_found, what) {}
};

struct StaleTrial : Error {
    explicit StaleTrial(const std::string &what) : Error(ErrorCode::stale_trial, what) {}
};

}  // namespace bellsim
