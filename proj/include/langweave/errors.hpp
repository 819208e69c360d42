#pragma once

#include <stdexcept>
#include <string>

namespace langweave {

// Exit codes used by the CLI. Library code throws; the CLI maps to codes.
enum class ExitCode : int {
    ok = 0,
    usage = 2,
    config = 3,
    partial = 4,
    internal = 5,
};

class Error : public std::runtime_error {
public:
    explicit Error(std::string msg) : std::runtime_error(std::move(msg)) {}
};

// Bad input data: malformed manifests, invalid records, schema violations.
class ValidationError : public Error {
public:
    using Error::Error;
};

// Bad configuration: missing paths, unknown backends, invalid thresholds.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A backend call failed; retryable by policy.
class BackendError : public Error {
public:
    using Error::Error;
};

// The run finished but some units exhausted retries or cells are absent.
class PartialFailure : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace langweave
