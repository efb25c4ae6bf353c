#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dfwe {

/// Base class for every error thrown by this library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unrecognized container: wrong magic bytes or unsupported format version.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Recognized container with an inconsistent or truncated payload.
class CorruptionError : public Error {
public:
    using Error::Error;
};

/// An in-memory value violates a type invariant (non-finite tensor element,
/// weights off the simplex, label out of range, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value or malformed config file.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Checkpoints in a set disagree on architecture. Carries the first mismatch.
class CompatibilityError : public Error {
public:
    CompatibilityError(std::size_t member_index, std::string tensor_name,
                       std::string expected, std::string found)
        : Error("checkpoint set incompatible: member " + std::to_string(member_index) +
                ", tensor \"" + tensor_name + "\": expected " + expected + ", found " + found),
          member_index_(member_index),
          tensor_name_(std::move(tensor_name)),
          expected_(std::move(expected)),
          found_(std::move(found)) {}

    std::size_t member_index() const { return member_index_; }
    const std::string& tensor_name() const { return tensor_name_; }
    const std::string& expected() const { return expected_; }
    const std::string& found() const { return found_; }

private:
    std::size_t member_index_;
    std::string tensor_name_;
    std::string expected_;
    std::string found_;
};

/// Training aborted (non-finite loss or gradient).
class TrainingError : public Error {
public:
    using Error::Error;
};

/// External evaluator failed in a way that cannot be expressed as a response
/// status (spawn failure, broken pipe before any output).
class EvaluatorError : public Error {
public:
    using Error::Error;
};

}  // namespace dfwe
