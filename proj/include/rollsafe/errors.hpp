#pragma once

#include <stdexcept>
#include <string>

namespace rollsafe {

// Precondition or argument outside the documented domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// ZMP denominator vanished (|g_z| too small).
class SingularityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Constraint assembly was asked to run without a current measurement.
class StalenessError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Integrator produced a non-finite state.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rollsafe
