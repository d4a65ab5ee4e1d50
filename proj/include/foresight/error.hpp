#pragma once

#include <stdexcept>
#include <string>

namespace foresight {

// Exit codes surfaced by the command-line driver.
enum class ExitCode : int {
    ok = 0,
    usage = 1,
    config = 2,
    gateway = 3,
    data = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::data; }
};

// Bad or missing configuration. The message names the offending key.
class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::config; }
};

// Malformed input data, violated invariants, corrupt partial state.
class DataError : public Error {
public:
    using Error::Error;
};

// A backend call failed. Transient failures are retried by RetryPolicy.
// Aborting failures are never retried or absorbed by a fallback; they end the run.
class GatewayError : public Error {
public:
    GatewayError(const std::string& what, bool transient, bool aborts = false)
        : Error(what), transient_(transient), aborts_(aborts) {}
    bool transient() const noexcept { return transient_; }
    bool aborts() const noexcept { return aborts_; }
    ExitCode exit_code() const noexcept override { return ExitCode::gateway; }

private:
    bool transient_;
    bool aborts_;
};

// A scripted mock received a request it has no record for.
class ScriptMiss : public GatewayError {
public:
    explicit ScriptMiss(const std::string& what) : GatewayError(what, false, true) {}
};

// A gateway's configured request budget ran out.
class BudgetExhausted : public GatewayError {
public:
    explicit BudgetExhausted(const std::string& what) : GatewayError(what, false, true) {}
};

}  // namespace foresight
