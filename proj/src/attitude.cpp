#include "rwctl/attitude.hpp"

#include <cmath>
#include <stdexcept>

namespace rwctl {

UnitQuaternion UnitQuaternion::from_axis_angle(const Vec3 &axis, double angle) {
    const double n = axis.norm();
    if (n == 0.0) {
        return identity();
    }
    return {std::cos(0.5 * angle), axis / n * std::sin(0.5 * angle)};
}

UnitQuaternion UnitQuaternion::canonical() const {
    if (q0 < 0.0) {
        return {-q0, -qv};
    }
    return *this;
}

double UnitQuaternion::norm() const { return std::sqrt(q0 * q0 + qv.squaredNorm()); }

UnitQuaternion UnitQuaternion::normalized() const {
    const double n = norm();
    return {q0 / n, qv / n};
}

Vec3 UnitQuaternion::rotate(const Vec3 &v) const {
    // v' = v + 2 q0 (qv x v) + 2 qv x (qv x v)
    const Vec3 t = 2.0 * qv.cross(v);
    return v + q0 * t + qv.cross(t);
}

Mat3 UnitQuaternion::to_matrix() const {
    const Mat3 S = skew(qv);
    return (q0 * q0 - qv.squaredNorm()) * Mat3::Identity() + 2.0 * qv * qv.transpose() +
           2.0 * q0 * S;
}

UnitQuaternion operator*(const UnitQuaternion &a, const UnitQuaternion &b) {
    return {a.q0 * b.q0 - a.qv.dot(b.qv), a.q0 * b.qv + b.q0 * a.qv + a.qv.cross(b.qv)};
}

Mat3 skew(const Vec3 &v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return m;
}

AttitudeMRP mrp_from_quat(const UnitQuaternion &q) {
    if (1.0 + q.q0 < 1e-12) {
        throw std::invalid_argument("mrp_from_quat: q0 = -1 has no finite MRP");
    }
    const UnitQuaternion c = q.canonical();
    return {c.qv / (1.0 + c.q0)};
}

UnitQuaternion quat_from_mrp(const AttitudeMRP &s) {
    const double s2 = s.sigma.squaredNorm();
    const double den = 1.0 + s2;
    return {(1.0 - s2) / den, 2.0 * s.sigma / den};
}

AttitudeMRP mrp_shadow(const AttitudeMRP &s) {
    const double s2 = s.sigma.squaredNorm();
    if (s2 == 0.0) {
        throw std::invalid_argument("mrp_shadow: shadow set of the zero MRP is undefined");
    }
    return {-s.sigma / s2};
}

AttitudeMRP mrp_canonical(const AttitudeMRP &s) {
    if (s.sigma.squaredNorm() > 1.0) {
        return mrp_shadow(s);
    }
    return s;
}

AttitudeMRP mrp_error(const AttitudeMRP &current, const AttitudeMRP &target) {
    // Fused multiply-adds in the product leave ~1e-17 residue for identical inputs.
    if (current.sigma == target.sigma) return {};
    const UnitQuaternion qc = quat_from_mrp(current);
    const UnitQuaternion qt = quat_from_mrp(target);
    const UnitQuaternion qe = (qt.conjugate() * qc).canonical();
    // A canonical quaternion has q0 >= 0, so the resulting MRP already has |s| <= 1.
    return mrp_canonical(AttitudeMRP{qe.qv / (1.0 + qe.q0)});
}

double principal_angle(const AttitudeMRP &s) { return 4.0 * std::atan(s.sigma.norm()); }

Mat3 mrp_kinematics_matrix(const AttitudeMRP &s) {
    const Vec3 &p = s.sigma;
    return 0.25 * ((1.0 - p.squaredNorm()) * Mat3::Identity() + 2.0 * skew(p) +
                   2.0 * p * p.transpose());
}

Vec3 mrp_rate(const AttitudeMRP &s, const Vec3 &omega) {
    return mrp_kinematics_matrix(s) * omega;
}

Eigen::Vector4d quat_rate(const UnitQuaternion &q, const Vec3 &omega) {
    const UnitQuaternion w{0.0, omega};
    const UnitQuaternion d = q * w;
    return 0.5 * d.coeffs();
}

}  // namespace rwctl
