// Attitude representations and kinematics
// Modified Rodrigues Parameters, unit quaternions, error composition
#pragma once

#include <Eigen/Dense>

namespace rwctl {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Unit quaternion with scalar part first, Hamilton product convention.
///
/// The attitude quaternion maps body-frame vectors into the inertial frame,
/// so q_dot = 0.5 * q (x) (0, omega_body).
struct UnitQuaternion {
    double q0 = 1.0;
    Vec3 qv = Vec3::Zero();

    static UnitQuaternion identity() { return {}; }
    static UnitQuaternion from_axis_angle(const Vec3 &axis, double angle);

    /// Flips the overall sign when q0 < 0.
    [[nodiscard]] UnitQuaternion canonical() const;
    [[nodiscard]] UnitQuaternion normalized() const;
    [[nodiscard]] UnitQuaternion conjugate() const { return {q0, -qv}; }
    [[nodiscard]] double norm() const;
    [[nodiscard]] Eigen::Vector4d coeffs() const { return {q0, qv.x(), qv.y(), qv.z()}; }
    [[nodiscard]] Vec3 rotate(const Vec3 &v) const;
    [[nodiscard]] Mat3 to_matrix() const;
};

/// Hamilton product a (x) b.
UnitQuaternion operator*(const UnitQuaternion &a, const UnitQuaternion &b);

/// Modified Rodrigues Parameters, sigma = e * tan(theta / 4).
struct AttitudeMRP {
    Vec3 sigma = Vec3::Zero();

    [[nodiscard]] double norm() const { return sigma.norm(); }
    /// True when |sigma| <= 1 (ties stay in the current set).
    [[nodiscard]] bool is_canonical() const { return sigma.squaredNorm() <= 1.0 + 1e-12; }
};

/// Cross-product matrix: skew(v) * w == v.cross(w).
Mat3 skew(const Vec3 &v);

/// Throws std::invalid_argument for q0 == -1, where the MRP is singular.
AttitudeMRP mrp_from_quat(const UnitQuaternion &q);

UnitQuaternion quat_from_mrp(const AttitudeMRP &s);

/// Alternate MRP set -s / |s|^2 describing the same rotation.
/// Throws std::invalid_argument for the zero vector.
AttitudeMRP mrp_shadow(const AttitudeMRP &s);

/// Switches to the shadow set when |s| > 1.
AttitudeMRP mrp_canonical(const AttitudeMRP &s);

/// Rotation from the target frame to the current body frame,
/// computed as q_target^-1 (x) q_current and returned in the canonical set.
AttitudeMRP mrp_error(const AttitudeMRP &current, const AttitudeMRP &target);

/// Principal rotation angle 4 * atan(|s|), radians.
double principal_angle(const AttitudeMRP &s);

/// MRP kinematics matrix B(s) with s_dot = B(s) * omega.
///
///   B(s) = 1/4 [ (1 - s's) I + 2 skew(s) + 2 s s' ]
///
/// This is the form consistent with q_dot = 0.5 q (x) (0, omega); at s = 0 it
/// reduces to omega / 4.
Mat3 mrp_kinematics_matrix(const AttitudeMRP &s);

Vec3 mrp_rate(const AttitudeMRP &s, const Vec3 &omega);

/// Quaternion kinematics q_dot = 0.5 q (x) (0, omega), as a 4-vector (q0, qv).
Eigen::Vector4d quat_rate(const UnitQuaternion &q, const Vec3 &omega);

}  // namespace rwctl
