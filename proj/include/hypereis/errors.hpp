#pragma once

#include <stdexcept>
#include <string>

namespace hypereis {

// Invalid argument or violated precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Evaluation too close to a pole of a special function or a normalization.
class PoleError : public DomainError {
public:
    using DomainError::DomainError;
};

// A series or iteration did not meet its tolerance before the cap.
class ConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed job configuration (CLI layer).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace hypereis
