#pragma once

#include <stdexcept>
#include <string>

namespace rwctl {

/// Integration produced a non-finite state or exceeded the rate cap.
class SimulationDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid configuration. `line` is 1-based, 0 when no source location applies.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string &what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line) {}

    [[nodiscard]] int line() const { return line_; }

private:
    int line_;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Training aborted because a loss or parameter became non-finite.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace rwctl
