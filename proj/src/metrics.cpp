#include "rwctl/metrics.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace rwctl {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double spacing(const std::vector<TelemetryRecord> &r) {
    return r.size() > 1 ? r[1].t - r[0].t : 0.0;
}

}  // namespace

double settle_time(const std::vector<TelemetryRecord> &records, double threshold_deg,
                   double hold_s) {
    if (records.empty()) return kNaN;
    const double dt = spacing(records);
    const double span = records.back().t - records.front().t + dt;
    const double eps = 1e-9 * std::max(1.0, hold_s);
    std::size_t start = 0;
    bool in_run = false;
    for (std::size_t i = 0; i < records.size(); ++i) {
        if (!(records[i].error_angle_deg < threshold_deg)) {
            in_run = false;
            continue;
        }
        if (!in_run) {
            in_run = true;
            start = i;
        }
        // Each record stands for the control interval that starts at its t.
        if (records[i].t - records[start].t + dt >= hold_s - eps) return records[start].t;
    }
    if (in_run && span < hold_s) return records[start].t;
    return kNaN;
}

double torque_smoothness(const std::vector<TelemetryRecord> &records) {
    if (records.size() < 2) return 0.0;
    const int n = records.front().wheels();
    if (n == 0) return 0.0;
    double total = 0.0;
    for (std::size_t k = 1; k < records.size(); ++k) {
        total += (records[k].tau_applied - records[k - 1].tau_applied).cwiseAbs().sum();
    }
    const double span = records.back().t - records.front().t + spacing(records);
    return total / n * (1000.0 / span);
}

RunMetrics compute_metrics(const std::vector<TelemetryRecord> &records,
                           std::optional<double> fault_time) {
    if (records.empty()) throw std::invalid_argument("metrics: telemetry is empty");
    RunMetrics m;
    double pre = 0.0, post = 0.0, omega_sq = 0.0;
    std::size_t n_pre = 0, n_post = 0;
    const double tol = fault_time ? 1e-9 * std::max(1.0, std::abs(*fault_time)) : 0.0;
    for (const TelemetryRecord &r : records) {
        if (!fault_time || r.t < *fault_time - tol) {
            pre += r.error_angle_deg;
            ++n_pre;
        } else {
            post += r.error_angle_deg;
            omega_sq += r.omega.squaredNorm();
            ++n_post;
        }
    }
    if (n_pre == 0) throw std::invalid_argument("metrics: pre-fault window is empty");
    m.mean_err_pre = pre / static_cast<double>(n_pre);
    if (fault_time) {
        if (n_post == 0) throw std::invalid_argument("metrics: post-fault window is empty");
        m.mean_err_post = post / static_cast<double>(n_post);
        m.rms_omega_post = std::sqrt(omega_sq / static_cast<double>(n_post));
    } else {
        m.mean_err_post = kNaN;
        m.rms_omega_post = kNaN;
    }
    m.settle_time_s = settle_time(records);
    m.torque_smoothness = torque_smoothness(records);
    return m;
}

}  // namespace rwctl
