#pragma once

#include <stdexcept>
#include <string>

namespace ounts {

// Raised when arguments fall outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Raised when a numerical procedure (quadrature, root finding, optimizer)
// fails to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised for malformed run configurations and input files.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace ounts
