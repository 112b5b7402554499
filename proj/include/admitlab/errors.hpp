#pragma once

#include <stdexcept>
#include <string>

namespace admitlab {

// Argument outside the mathematical domain of a function (e.g. quantile(0)).
struct DomainError : std::domain_error {
    using std::domain_error::domain_error;
};

// Root-finding bracket whose endpoints do not straddle zero.
struct BracketError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario/policy combination violating a precondition of the requested operation.
struct ModelError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Malformed external input: JSON, CSV, mappings.
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace admitlab
