#pragma once

#include <stdexcept>
#include <string>

namespace nehari {

// Broad failure classes; the CLI maps them onto process exit codes.
enum class ErrorKind {
    config,        // malformed input, unknown keys, bad flags
    precondition,  // a mathematical precondition does not hold
    numeric,       // a computation could not be completed to tolerance
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string msg)
        : std::runtime_error(std::move(msg)), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

struct ConfigError : Error {
    explicit ConfigError(std::string msg) : Error(ErrorKind::config, std::move(msg)) {}
};

struct PreconditionError : Error {
    explicit PreconditionError(std::string msg) : Error(ErrorKind::precondition, std::move(msg)) {}
};

// u lies outside the admissible cone; no fibering root exists.
struct NotInAError : PreconditionError {
    explicit NotInAError(std::string msg) : PreconditionError(std::move(msg)) {}
};

// The fibering bracket ran past its floor/cap without a sign change.
struct BracketOverflowError : Error {
    explicit BracketOverflowError(std::string msg) : Error(ErrorKind::numeric, std::move(msg)) {}
};

// A limit evaluation saw an oscillatory tail and refuses to extrapolate.
struct UndecidedError : Error {
    explicit UndecidedError(std::string msg) : Error(ErrorKind::numeric, std::move(msg)) {}
};

struct DimensionUnsupportedError : PreconditionError {
    explicit DimensionUnsupportedError(std::string msg) : PreconditionError(std::move(msg)) {}
};

struct FailedNegativeStartError : PreconditionError {
    explicit FailedNegativeStartError(std::string msg) : PreconditionError(std::move(msg)) {}
};

} // namespace nehari
