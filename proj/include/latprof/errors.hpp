// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <stdexcept>
#include <string>

namespace latprof {

/// Base for every error the harness raises on purpose.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration, grid file, or enum label. CLI exit code 2.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A reply that could not be read as the requested answer.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Connection-level failure. Safe to retry.
class TransportError : public Error {
public:
    TransportError(const std::string& what, int attempts)
        : Error(what + " (after " + std::to_string(attempts) + " attempt(s))"), attempts_(attempts) {}

    int attempts() const noexcept { return attempts_; }

private:
    int attempts_;
};

/// Endpoint answered with a non-2xx status.
class HttpStatusError : public Error {
public:
    HttpStatusError(int status, std::string body_excerpt)
        : Error("chat endpoint returned HTTP " + std::to_string(status) + ": " + body_excerpt),
          status_(status), body_excerpt_(std::move(body_excerpt)) {}

    int status() const noexcept { return status_; }
    const std::string& body_excerpt() const noexcept { return body_excerpt_; }

private:
    int status_;
    std::string body_excerpt_;
};

/// Backend kept returning nothing usable for an elicitation or judge request.
class ElicitationFailure : public Error {
public:
    using Error::Error;
};

/// Statistical routine called on input it cannot handle (constant series, empty sample).
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// A pipeline stage failed. CLI exit code 3.
class StageError : public Error {
public:
    using Error::Error;
};

/// Artifact checksum does not match the manifest. CLI exit code 4.
class IntegrityError : public Error {
public:
    using Error::Error;
};

} // namespace latprof
