#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace probeable {

// Base for every failure the library reports by exception.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed problem/runner/log document. `location` is "file" or "file:line".
class ParseError : public Error {
public:
    ParseError(std::string location, const std::string &what)
        : Error(location + ": " + what), location_(std::move(location)) {}
    const std::string &location() const noexcept { return location_; }

private:
    std::string location_;
};

class DuplicateIdError : public Error {
public:
    explicit DuplicateIdError(const std::string &id)
        : Error("duplicate problem id '" + id + "'"), id_(id) {}
    const std::string &id() const noexcept { return id_; }

private:
    std::string id_;
};

// A probe argument list does not conform to a signature. `param` names the
// offending parameter (empty for arity errors).
class SignatureError : public Error {
public:
    SignatureError(std::string param, const std::string &what)
        : Error(param.empty() ? what : "parameter '" + param + "': " + what),
          param_(std::move(param)) {}
    const std::string &param() const noexcept { return param_; }

private:
    std::string param_;
};

class UnknownProblemError : public Error {
public:
    explicit UnknownProblemError(const std::string &id) : Error("unknown problem '" + id + "'") {}
};

class OracleError : public Error {
public:
    using Error::Error;
};

class MissingPlaceholderError : public Error {
public:
    using Error::Error;
};

// The compiler or interpreter named by a runner profile could not be started.
// Platform fault, never a graded failure.
class ToolchainMissingError : public Error {
public:
    using Error::Error;
};

class PatternError : public Error {
public:
    using Error::Error;
};

class LogError : public Error {
public:
    using Error::Error;
};

class InvalidClassificationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace probeable
