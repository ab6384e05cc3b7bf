#include "rwctl/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <string>

#include "rwctl/error.hpp"

namespace rwctl {

InertiaMatrix::InertiaMatrix(const Mat3 &J) : J_(J) {
    if (!J.allFinite()) {
        throw std::invalid_argument("inertia matrix has non-finite entries");
    }
    if ((J - J.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw std::invalid_argument("inertia matrix is not symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Mat3> eig(J);
    if (eig.eigenvalues().minCoeff() <= 0.0) {
        throw std::invalid_argument("inertia matrix is not positive-definite");
    }
    inv_ = J.inverse();
}

InertiaMatrix InertiaMatrix::diagonal(double jx, double jy, double jz) {
    return InertiaMatrix(Vec3(jx, jy, jz).asDiagonal().toDenseMatrix());
}

void WheelParams::validate() const {
    if (!(inertia > 0.0)) throw std::invalid_argument("wheel inertia must be > 0");
    if (!(speed_max > 0.0)) throw std::invalid_argument("wheel speed_max must be > 0");
    if (!(torque_max > 0.0)) throw std::invalid_argument("wheel torque_max must be > 0");
    if (!(beta > 0.0 && beta < kPi / 2.0)) {
        throw std::invalid_argument("pyramid beta must lie in (0, pi/2)");
    }
    if (n_primary != 4) throw std::invalid_argument("only four primary wheels are supported");
}

Eigen::Matrix<double, 3, 4> pyramid_geometry(double beta) {
    if (!(beta > 0.0 && beta < kPi / 2.0)) {
        throw std::invalid_argument("pyramid beta must lie in (0, pi/2)");
    }
    Eigen::Matrix<double, 3, 4> G;
    const double cb = std::cos(beta);
    const double sb = std::sin(beta);
    // Exact quarter turns keep the x/y cancellation free of cos(pi/2) residue.
    const double c[4] = {1.0, 0.0, -1.0, 0.0};
    const double s[4] = {0.0, 1.0, 0.0, -1.0};
    for (int k = 0; k < 4; ++k) {
        G.col(k) << cb * c[k], cb * s[k], sb;
    }
    return G;
}

WheelArray WheelArray::make(const WheelParams &params) {
    params.validate();
    WheelArray a;
    const int n = params.count();
    a.geometry.resize(3, n);
    a.geometry.leftCols<4>() = pyramid_geometry(params.beta);
    if (params.has_backup) {
        a.geometry.col(4) = Vec3::UnitZ();
    }
    a.fault_flags.assign(static_cast<size_t>(n), false);
    return a;
}

bool WheelArray::can_actuate(int i) const {
    if (fault_flags[static_cast<size_t>(i)]) return false;
    if (i >= 4) return backup_active;
    return true;
}

Vec3 body_torque(const VecX &applied, const Mat3X &geometry) { return -(geometry * applied); }

Vec3 wheel_momentum(const VecX &speeds, const Mat3X &geometry, double wheel_inertia) {
    return geometry * (wheel_inertia * speeds);
}

Vec3 omega_dot(const Vec3 &omega, const Vec3 &u, const InertiaMatrix &J, const Vec3 &h_w) {
    const Vec3 h = J.matrix() * omega + h_w;
    return J.inverse() * (u - omega.cross(h));
}

WheelAccel wheel_accel(const VecX &commanded, const VecX &speeds, const WheelArray &array,
                       const WheelParams &params, double dt) {
    const int n = array.size();
    if (commanded.size() != n || speeds.size() != n) {
        throw std::invalid_argument("wheel_accel: size mismatch");
    }
    WheelAccel out{VecX::Zero(n), VecX::Zero(n)};
    for (int i = 0; i < n; ++i) {
        if (!array.can_actuate(i) || !std::isfinite(commanded[i])) {
            continue;
        }
        double tau = std::clamp(commanded[i], -params.torque_max, params.torque_max);
        const double w = speeds[i];
        if (tau > 0.0) {
            if (w >= params.speed_max) {
                tau = 0.0;
            } else if (dt > 0.0) {
                tau = std::min(tau, (params.speed_max - w) * params.inertia / dt);
            }
        } else if (tau < 0.0) {
            if (w <= -params.speed_max) {
                tau = 0.0;
            } else if (dt > 0.0) {
                tau = std::max(tau, (-params.speed_max - w) * params.inertia / dt);
            }
        }
        out.applied[i] = tau;
        out.speed_dot[i] = tau / params.inertia;
    }
    return out;
}

namespace {

struct Derivative {
    Vec3 sigma_dot;
    Vec3 omega_dot;
};

Derivative derivative(const Vec3 &sigma, const Vec3 &omega, const VecX &speeds, const Vec3 &u,
                      const SpacecraftModel &model, const Mat3X &G) {
    const Vec3 h_w = model.wheel_gyroscopic_coupling
                         ? wheel_momentum(speeds, G, model.wheels.inertia)
                         : Vec3::Zero();
    return {mrp_rate(AttitudeMRP{sigma}, omega), omega_dot(omega, u, model.inertia, h_w)};
}

}  // namespace

StepResult step(const SpacecraftState &state, const VecX &commanded, double dt,
                const SpacecraftModel &model, const WheelArray &array) {
    if (!(dt > 0.0)) {
        throw std::invalid_argument("step: dt must be > 0");
    }
    const WheelAccel acc = wheel_accel(commanded, state.wheel_speeds, array, model.wheels, dt);
    const Mat3X &G = array.geometry;
    const Vec3 u = body_torque(acc.applied, G);

    // Wheel speeds are linear in time under a held torque, so each RK4 stage
    // can evaluate them in closed form.
    const VecX &w0 = state.wheel_speeds;
    const VecX w_half = w0 + 0.5 * dt * acc.speed_dot;
    const VecX w_end = w0 + dt * acc.speed_dot;

    const Vec3 &s0 = state.attitude.sigma;
    const Vec3 &o0 = state.omega;
    const Derivative k1 = derivative(s0, o0, w0, u, model, G);
    const Derivative k2 =
        derivative(s0 + 0.5 * dt * k1.sigma_dot, o0 + 0.5 * dt * k1.omega_dot, w_half, u, model, G);
    const Derivative k3 =
        derivative(s0 + 0.5 * dt * k2.sigma_dot, o0 + 0.5 * dt * k2.omega_dot, w_half, u, model, G);
    const Derivative k4 =
        derivative(s0 + dt * k3.sigma_dot, o0 + dt * k3.omega_dot, w_end, u, model, G);

    StepResult out;
    out.applied = acc.applied;
    SpacecraftState &next = out.state;
    const Vec3 sigma =
        s0 + dt / 6.0 * (k1.sigma_dot + 2.0 * k2.sigma_dot + 2.0 * k3.sigma_dot + k4.sigma_dot);
    next.omega =
        o0 + dt / 6.0 * (k1.omega_dot + 2.0 * k2.omega_dot + 2.0 * k3.omega_dot + k4.omega_dot);
    next.wheel_speeds = w_end;
    next.t = state.t + dt;

    if (!sigma.allFinite() || !next.omega.allFinite() || !next.wheel_speeds.allFinite()) {
        throw SimulationDiverged("non-finite spacecraft state at t = " + std::to_string(next.t));
    }
    if (next.omega.norm() > model.omega_cap) {
        throw SimulationDiverged("angular rate " + std::to_string(next.omega.norm()) +
                                 " rad/s exceeds cap at t = " + std::to_string(next.t));
    }
    next.attitude = mrp_canonical(AttitudeMRP{sigma});
    return out;
}

Vec3 inertial_momentum(const SpacecraftState &state, const SpacecraftModel &model,
                       const Mat3X &geometry) {
    const Vec3 h_body = model.inertia.matrix() * state.omega +
                        wheel_momentum(state.wheel_speeds, geometry, model.wheels.inertia);
    return quat_from_mrp(state.attitude).rotate(h_body);
}

double body_kinetic_energy(const Vec3 &omega, const InertiaMatrix &J) {
    return 0.5 * omega.dot(J.matrix() * omega);
}

FaultSchedule::FaultSchedule(std::vector<FaultEvent> events) : events_(std::move(events)) {
    std::set<int> seen;
    for (const auto &e : events_) {
        if (e.wheel < 0) throw std::invalid_argument("fault schedule: negative wheel index");
        if (!(e.time >= 0.0)) throw std::invalid_argument("fault schedule: negative fault time");
        if (!seen.insert(e.wheel).second) {
            throw std::invalid_argument("fault schedule: duplicate entry for wheel " +
                                        std::to_string(e.wheel));
        }
    }
}

void FaultSchedule::validate_for(int n_wheels) const {
    for (const auto &e : events_) {
        if (e.wheel >= n_wheels) {
            throw std::invalid_argument("fault schedule: wheel " + std::to_string(e.wheel) +
                                        " does not exist");
        }
    }
}

bool FaultSchedule::apply(WheelArray &array, double t_step_start) const {
    bool changed = false;
    for (const auto &e : events_) {
        // Clock accumulates dt sums; absorb the rounding at the boundary.
        const double tol = 1e-9 * std::max(1.0, e.time);
        auto flag = array.fault_flags[static_cast<size_t>(e.wheel)];
        if (!flag && t_step_start >= e.time - tol) {
            array.fault_flags[static_cast<size_t>(e.wheel)] = true;
            changed = true;
        }
    }
    return changed;
}

}  // namespace rwctl
