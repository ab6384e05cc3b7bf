// Per-control-step telemetry and its CSV form
#pragma once

#include <string>
#include <vector>

#include "rwctl/environment.hpp"

namespace rwctl {

/// State at the start of a control step, plus what that step commanded,
/// applied and earned.
struct TelemetryRecord {
    double t = 0.0;  // s
    Vec3 sigma_err = Vec3::Zero();
    Vec3 omega = Vec3::Zero();  // rad/s
    double error_angle_deg = 0.0;
    VecX tau_cmd;      // N m per wheel, mean over the step
    VecX tau_applied;  // N m per wheel, mean over the step
    VecX wheel_speed;  // rad/s per wheel
    double reward = 0.0;
    std::vector<bool> fault_flags;

    [[nodiscard]] int wheels() const { return static_cast<int>(tau_cmd.size()); }
};

/// Record for a step that started at `obs` / `state` and produced `out`.
TelemetryRecord make_record(double t, const Observation &obs, const SpacecraftState &state,
                            const StepOutcome &out);

/// Column names for an array of `wheels` wheels.
std::vector<std::string> telemetry_header(int wheels);

/// Header plus one row per record; floats carry 17 significant digits.
/// With no records the wheel count defaults to 4. Throws std::runtime_error
/// on I/O failure or inconsistent wheel counts.
void write_telemetry(const std::vector<TelemetryRecord> &records, const std::string &path);
std::string telemetry_csv(const std::vector<TelemetryRecord> &records);

/// Inverse of telemetry_csv. Throws std::runtime_error on malformed input.
std::vector<TelemetryRecord> parse_telemetry(const std::string &csv);
std::vector<TelemetryRecord> read_telemetry(const std::string &path);

}  // namespace rwctl
