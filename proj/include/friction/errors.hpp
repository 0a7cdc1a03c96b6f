#ifndef FRICTION_ERRORS_HPP
#define FRICTION_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace friction {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A domain-type invariant was violated. The message names the invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Dataset file problem; carries the 1-based line number when known.
class DatasetError : public Error {
public:
    DatasetError(const std::string& msg, int line = 0) : Error(msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_;
};

class StoreError : public Error {
public:
    using Error::Error;
};

class AnalysisError : public Error {
public:
    using Error::Error;
};

/// Model call failure. Retryable errors (timeouts, 5xx, malformed bodies)
/// are retried by the engine up to its attempt budget; non-retryable ones
/// abort the problem immediately.
class ModelError : public Error {
public:
    ModelError(const std::string& msg, bool retryable, int http_status = 0)
        : Error(msg), retryable_(retryable), http_status_(http_status) {}
    bool retryable() const { return retryable_; }
    int http_status() const { return http_status_; }

private:
    bool retryable_;
    int http_status_;
};

/// Backend cannot return token log-probabilities. Non-fatal: the caller
/// records the completion without them.
class UnsupportedLogprobs : public ModelError {
public:
    UnsupportedLogprobs() : ModelError("backend does not support logprobs", false) {}
};

/// A feedback text still contained the gold answer after masking.
/// Raised by the runtime leak check; indicates a masking bug.
class FeedbackLeak : public Error {
public:
    using Error::Error;
};

}  // namespace friction

#endif
