#include "rwctl/baselines.hpp"

#include <stdexcept>

#include "rwctl/error.hpp"

namespace rwctl {

void PDGains::validate() const {
    if (!(kp > 0.0)) throw ConfigError("pd.kp must be > 0");
    if (!(kd > 0.0)) throw ConfigError("pd.kd must be > 0");
}

Vec3 pd_control(const Vec3 &mrp_error, const Vec3 &omega, const PDGains &gains) {
    return -gains.kp * mrp_error - gains.kd * omega;
}

PseudoInverseAllocation::PseudoInverseAllocation(const Mat3X &geometry) {
    const Eigen::MatrixXd G = geometry;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(G, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto &s = svd.singularValues();
    if (s.size() < 3 || s[2] <= 1e-12 * s[0]) {
        throw std::invalid_argument("allocation geometry must have rank 3");
    }
    // G^+ = G' (G G')^-1 for full row rank.
    pinv_ = G.transpose() * (G * G.transpose()).inverse();
}

VecX PseudoInverseAllocation::allocate(const Vec3 &u_body) const { return -pinv_ * u_body; }

PdController::PdController(PDGains gains, const WheelParams &wheels)
    : gains_(gains),
      alloc_(Mat3X(pyramid_geometry(wheels.beta))),
      torque_max_(wheels.torque_max) {
    gains_.validate();
}

Action PdController::act(const Observation &obs) const {
    const VecX tau = alloc_.allocate(pd_control(obs.mrp_error, obs.omega, gains_));
    Action a;
    a.a = tau.head<4>() / torque_max_;
    return a.clamped();
}

}  // namespace rwctl
