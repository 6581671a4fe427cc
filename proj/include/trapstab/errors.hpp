#pragma once

#include <stdexcept>
#include <string>

namespace trapstab {

/// Raised when the adaptive integrator cannot complete a step.
class IntegrationError : public std::runtime_error {
public:
    enum class Kind { StepUnderflow, NonFiniteState, MaxStepsExceeded };

    IntegrationError(Kind kind, const std::string& what)
        : std::runtime_error(what), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Raised when a physics precondition fails (e.g. an exclusion-scan
/// reference point that is already unstable without CSL).
class PhysicsPreconditionError : public std::runtime_error {
public:
    explicit PhysicsPreconditionError(const std::string& what)
        : std::runtime_error(what) {}
};

/// Raised on malformed configuration files or inconsistent run options.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what)
        : std::runtime_error(what) {}
};

} // namespace trapstab
