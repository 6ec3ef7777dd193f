#pragma once

#include <stdexcept>
#include <string>

namespace vg {

// Error taxonomy used across the project. The CLI maps these onto exit codes
// (config -> 2, training abort -> 3, contract violation -> 4).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ShapeError : std::runtime_error {
    explicit ShapeError(const std::string& msg) : std::runtime_error(msg) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

struct TrainingAbort : std::runtime_error {
    explicit TrainingAbort(const std::string& msg) : std::runtime_error(msg) {}
};

struct ContractViolation : std::runtime_error {
    explicit ContractViolation(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace vg
