#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ibrag {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Bad CLI flags, unreadable/invalid config files, invalid hyperparameters.
class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

// A record violates the JSONL schema. Carries the 1-based line number and
// the offending field so batch loaders can point at the exact input.
class SchemaError : public Error {
public:
    SchemaError(std::size_t line, std::string field, const std::string& detail)
        : Error("line " + std::to_string(line) + ": field '" + field + "': " + detail),
          line_(line),
          field_(std::move(field)) {}

    std::size_t line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

// Scoring backend failures: network errors, HTTP error statuses, protocol
// violations in responses.
class BackendError : public Error {
public:
    using Error::Error;
};

// The prompt/continuation boundary could not be mapped onto a token
// boundary, even after the single newline-separator retry.
class AlignmentError : public BackendError {
public:
    using BackendError::BackendError;
};

} // namespace ibrag
