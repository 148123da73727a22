#pragma once

#include <stdexcept>
#include <string>

namespace degopt {

// Thrown when a precondition on arguments or shapes is violated.
using invalid_argument = std::invalid_argument;

// Operator assembly could not complete (e.g. coefficient negative at a
// quadrature point).
class assembly_failure : public std::runtime_error {
public:
    explicit assembly_failure(const std::string& what) : std::runtime_error(what) {}
};

// A time step could not be completed; carries the offending step index.
class step_failure : public std::runtime_error {
public:
    step_failure(const std::string& what, int step)
        : std::runtime_error(what + " (step " + std::to_string(step) + ")"), step_index(step) {}
    int step_index;
};

// Configuration file is structurally or semantically invalid.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace degopt
