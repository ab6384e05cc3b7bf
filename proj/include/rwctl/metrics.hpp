// Summary metrics over a telemetry trace
#pragma once

#include <optional>
#include <vector>

#include "rwctl/telemetry.hpp"

namespace rwctl {

struct RunMetrics {
    double mean_err_pre = 0.0;   // deg, records with t < fault time
    double mean_err_post = 0.0;  // deg, records with t >= fault time
    /// First time from which the error stays below 1 deg for 100 s; NaN if never.
    double settle_time_s = 0.0;
    double rms_omega_post = 0.0;  // rad/s
    /// Mean over wheels of sum |delta tau_applied|, per 1000 s of trace. N m.
    double torque_smoothness = 0.0;
};

constexpr double kSettleThresholdDeg = 1.0;
constexpr double kSettleHoldS = 100.0;

/// Records are assumed sorted by t and evenly spaced. Without a fault time
/// the pre-fault window is the whole trace and the post-fault fields are NaN.
/// Throws std::invalid_argument when a window is empty.
RunMetrics compute_metrics(const std::vector<TelemetryRecord> &records,
                           std::optional<double> fault_time);

/// First t from which error_angle_deg < threshold holds for `hold` seconds,
/// each record covering one control interval. When the whole trace is shorter
/// than `hold`, a run reaching its end counts. NaN when the error never settles.
double settle_time(const std::vector<TelemetryRecord> &records,
                   double threshold_deg = kSettleThresholdDeg, double hold_s = kSettleHoldS);

/// Mean over wheels of total |delta tau_applied| scaled to a 1000 s span.
double torque_smoothness(const std::vector<TelemetryRecord> &records);

}  // namespace rwctl
