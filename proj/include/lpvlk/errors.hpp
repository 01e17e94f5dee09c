#pragma once

#include <stdexcept>
#include <string>

namespace lpvlk {

// Error taxonomy shared by all modules. The CLI maps these onto exit codes:
// config/input -> 2, synthesis/verification -> 3, simulation divergence -> 4.
struct DomainError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct GeometryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SynthesisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace lpvlk
