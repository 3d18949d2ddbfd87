#ifndef CYCLEVC_ERROR_HPP
#define CYCLEVC_ERROR_HPP

#include <stdexcept>
#include <string>
#include <utility>

namespace cyclevc {

// Base for every error the library raises on bad input or configuration.
// Anything else escaping the library (std::bad_alloc, logic errors) is an
// internal failure.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class InputError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class PairingError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

// Wraps the error that aborted a multi-stage run.
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& message)
        : Error("stage '" + stage + "' failed: " + message), stage_(std::move(stage)) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

} // namespace cyclevc

#endif
