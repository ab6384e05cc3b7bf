// Fixed-gain PD attitude control with a static pseudo-inverse wheel allocation
#pragma once

#include "rwctl/environment.hpp"

namespace rwctl {

struct PDGains {
    double kp = 0.02;  // N m per unit MRP error
    double kd = 0.2;   // N m s / rad

    /// Throws ConfigError unless both gains are positive.
    void validate() const;
};

/// u = -kp sigma_err - kd omega, N m.
Vec3 pd_control(const Vec3 &mrp_error, const Vec3 &omega, const PDGains &gains);

/// Minimum-norm wheel torques for a desired body torque, computed once from
/// the nominal geometry. Wheel faults are not seen by this allocation.
class PseudoInverseAllocation {
public:
    /// Throws std::invalid_argument unless `geometry` has rank 3.
    explicit PseudoInverseAllocation(const Mat3X &geometry);

    /// tau = -G^+ u, so that the reaction torque -G tau equals u.
    [[nodiscard]] VecX allocate(const Vec3 &u_body) const;
    [[nodiscard]] const Eigen::MatrixXd &pseudo_inverse() const { return pinv_; }

private:
    Eigen::MatrixXd pinv_;  // n x 3
};

/// PD law plus fixed allocation, expressed as a normalized four-wheel action.
class PdController {
public:
    PdController(PDGains gains, const WheelParams &wheels);

    [[nodiscard]] Action act(const Observation &obs) const;
    [[nodiscard]] const PDGains &gains() const { return gains_; }

private:
    PDGains gains_;
    PseudoInverseAllocation alloc_;
    double torque_max_;
};

}  // namespace rwctl
