#pragma once

#include <stdexcept>
#include <string>

namespace ecomlm {

// Unusable input data (bad file, duplicate ids, incompatible checkpoints).
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Caller misuse: bad parameters, unsatisfiable policy, out-of-range step.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Remote backend failed after all retries.
struct TransportError : std::runtime_error {
    TransportError(const std::string& msg, int attempts_)
        : std::runtime_error(msg), attempts(attempts_) {}
    int attempts;
};

// Backend cannot satisfy the request shape (e.g. no logprob support).
struct CapabilityError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Request exceeds the provider's context window.
struct ContextOverflowError : std::runtime_error {
    ContextOverflowError(const std::string& msg, long limit_)
        : std::runtime_error(msg), limit(limit_) {}
    long limit;
};

} // namespace ecomlm
