// Rigid spacecraft with a pyramid reaction-wheel array
#pragma once

#include <vector>

#include <Eigen/Dense>

#include "rwctl/attitude.hpp"

namespace rwctl {

using VecX = Eigen::VectorXd;
using Mat3X = Eigen::Matrix3Xd;

constexpr double kPi = 3.14159265358979323846;
constexpr double kRpmToRadS = 2.0 * kPi / 60.0;

/// Symmetric positive-definite spacecraft inertia, kg m^2.
class InertiaMatrix {
public:
    /// Throws std::invalid_argument unless symmetric (1e-12) and positive-definite.
    explicit InertiaMatrix(const Mat3 &J);
    static InertiaMatrix diagonal(double jx, double jy, double jz);

    [[nodiscard]] const Mat3 &matrix() const { return J_; }
    [[nodiscard]] const Mat3 &inverse() const { return inv_; }

private:
    Mat3 J_;
    Mat3 inv_;
};

struct WheelParams {
    double inertia = 4.67e-4;                // spin-axis inertia, kg m^2
    double speed_max = 1500.0 * kRpmToRadS;  // rad/s
    double torque_max = 0.02;                // N m
    double beta = kPi / 4.0;                 // pyramid elevation, rad
    int n_primary = 4;
    bool has_backup = false;

    [[nodiscard]] int count() const { return n_primary + (has_backup ? 1 : 0); }
    /// Throws std::invalid_argument on out-of-range values.
    void validate() const;
};

/// Spin axes of a four-wheel pyramid; column k is
/// (cos b cos(k 90deg), cos b sin(k 90deg), sin b). Requires 0 < beta < pi/2.
Eigen::Matrix<double, 3, 4> pyramid_geometry(double beta);

/// Wheel geometry and health. Index 4, when present, is the backup wheel on +z.
struct WheelArray {
    Mat3X geometry;
    std::vector<bool> fault_flags;
    bool backup_active = false;

    static WheelArray make(const WheelParams &params);

    [[nodiscard]] int size() const { return static_cast<int>(fault_flags.size()); }
    [[nodiscard]] bool has_backup() const { return size() > 4; }
    /// Healthy and, for the backup wheel, switched on.
    [[nodiscard]] bool can_actuate(int i) const;
};

struct SpacecraftState {
    AttitudeMRP attitude;
    Vec3 omega = Vec3::Zero();
    VecX wheel_speeds;
    double t = 0.0;
};

struct SpacecraftModel {
    InertiaMatrix inertia = InertiaMatrix::diagonal(0.25, 0.5, 0.65);
    WheelParams wheels;
    /// Include -omega x h_w in the body equation.
    bool wheel_gyroscopic_coupling = true;
    /// |omega| beyond this is treated as divergence, rad/s.
    double omega_cap = 10.0;
};

/// Reaction torque on the body, u = -G tau.
Vec3 body_torque(const VecX &applied, const Mat3X &geometry);

/// Wheel angular momentum in body axes, G (I_w Omega).
Vec3 wheel_momentum(const VecX &speeds, const Mat3X &geometry, double wheel_inertia);

/// omega_dot = J^-1 (-omega x (J omega + h_w) + u).
Vec3 omega_dot(const Vec3 &omega, const Vec3 &u, const InertiaMatrix &J, const Vec3 &h_w);

struct WheelAccel {
    VecX applied;    // N m
    VecX speed_dot;  // rad/s^2
};

/// Applies fault, torque and speed limits to commanded wheel torques.
///
/// With dt > 0 the speed limit is enforced over a zero-order-hold interval: the
/// applied torque is reduced so the wheel lands exactly on +-speed_max at the end
/// of the step. With dt == 0 only the instantaneous rule applies (no torque that
/// pushes a wheel already at its limit further out).
WheelAccel wheel_accel(const VecX &commanded, const VecX &speeds, const WheelArray &array,
                       const WheelParams &params, double dt = 0.0);

struct StepResult {
    SpacecraftState state;
    VecX applied;
};

/// One RK4 step with commanded torques held constant over dt.
/// Throws SimulationDiverged on a non-finite state or |omega| > omega_cap.
StepResult step(const SpacecraftState &state, const VecX &commanded, double dt,
                const SpacecraftModel &model, const WheelArray &array);

/// Total angular momentum (body + wheels) expressed in the inertial frame.
Vec3 inertial_momentum(const SpacecraftState &state, const SpacecraftModel &model,
                       const Mat3X &geometry);

/// 0.5 omega' J omega.
double body_kinetic_energy(const Vec3 &omega, const InertiaMatrix &J);

struct FaultEvent {
    int wheel = 0;
    double time = 0.0;  // s
};

/// Latching wheel-failure schedule.
class FaultSchedule {
public:
    FaultSchedule() = default;
    /// Throws std::invalid_argument on duplicate wheels or negative times.
    explicit FaultSchedule(std::vector<FaultEvent> events);

    /// Throws std::invalid_argument if any wheel index is >= n_wheels.
    void validate_for(int n_wheels) const;

    /// Sets the flag of every wheel whose fault time is <= t_step_start.
    /// Returns true if any flag changed.
    bool apply(WheelArray &array, double t_step_start) const;

    [[nodiscard]] const std::vector<FaultEvent> &events() const { return events_; }
    [[nodiscard]] bool empty() const { return events_.empty(); }

private:
    std::vector<FaultEvent> events_;
};

}  // namespace rwctl
