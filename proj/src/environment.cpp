#include "rwctl/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rwctl/error.hpp"

namespace rwctl {

Vec6 Observation::to_vector() const {
    Vec6 v;
    v << mrp_error, omega;
    return v;
}

Action Action::clamped() const {
    Action out;
    for (int i = 0; i < kActionDim; ++i) {
        // NaN maps to 0 rather than propagating into the dynamics.
        out.a[i] = std::isfinite(a[i]) ? std::clamp(a[i], -1.0, 1.0) : 0.0;
    }
    return out;
}

RewardTerms reward_terms(double e_prev, double e_curr, double omega_norm,
                         const RewardConfig &cfg) {
    RewardTerms r;
    r.error_reduction = cfg.sparse ? 0.0 : e_prev - e_curr;
    r.rate_penalty = omega_norm > cfg.omega_threshold ? cfg.omega_penalty : 0.0;
    r.accuracy = e_curr < cfg.accuracy_threshold ? cfg.accuracy_bonus : -cfg.accuracy_bonus;
    return r;
}

double reward_fn(double e_prev, double e_curr, double omega_norm, const RewardConfig &cfg) {
    const RewardTerms r = reward_terms(e_prev, e_curr, omega_norm, cfg);
    return r.error_reduction + r.rate_penalty + r.accuracy;
}

double relabel_reward(const Transition &tr, const Goal &new_goal, const RewardConfig &cfg) {
    if (!tr.info) {
        throw std::invalid_argument("relabel_reward: transition has no info fields");
    }
    const TransitionInfo &info = *tr.info;
    const double e_prev = mrp_error(info.sigma_abs, new_goal.sigma_target).norm();
    const double e_curr = mrp_error(info.sigma_abs_next, new_goal.sigma_target).norm();
    return reward_fn(e_prev, e_curr, info.omega_norm, cfg);
}

Observation make_observation(const AttitudeMRP &sigma_abs, const Vec3 &omega, const Goal &goal) {
    return {mrp_error(sigma_abs, goal.sigma_target).sigma, omega};
}

AttitudeMRP achieved_goal(const SpacecraftState &state) { return state.attitude; }

VecX IdentityAllocator::allocate(const Vec4 &channel_torques, WheelArray &array,
                                 const WheelParams & /*params*/) {
    VecX cmd = VecX::Zero(array.size());
    cmd.head<4>() = channel_torques;
    return cmd;
}

std::unique_ptr<ControlAllocator> IdentityAllocator::clone() const {
    return std::make_unique<IdentityAllocator>(*this);
}

void EpisodeConfig::validate() const {
    if (n_steps < 1) throw ConfigError("n_steps must be >= 1");
    if (!(control_dt > 0.0)) throw ConfigError("control_dt must be > 0");
    if (substeps < 1) throw ConfigError("substeps must be >= 1");
    if (!(initial_angle_max >= 0.0 && initial_angle_max <= kPi)) {
        throw ConfigError("initial angle bound must lie in [0, 180] deg");
    }
    if (!(initial_omega_max >= 0.0)) throw ConfigError("initial omega bound must be >= 0");
    if (!(goal_angle_max >= 0.0 && goal_angle_max <= kPi)) {
        throw ConfigError("goal angle bound must lie in [0, 180] deg");
    }
}

UnitQuaternion sample_attitude(std::mt19937_64 &rng, double angle_max) {
    if (angle_max <= 0.0) {
        return UnitQuaternion::identity();
    }
    angle_max = std::min(angle_max, kPi);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Vec3 axis;
    do {
        axis = Vec3(normal(rng), normal(rng), normal(rng));
    } while (axis.norm() < 1e-12);
    // Haar measure restricted to angles <= angle_max has density ~ sin^2(theta / 2).
    const double peak = std::pow(std::sin(0.5 * angle_max), 2);
    double theta = 0.0;
    while (true) {
        theta = angle_max * unit(rng);
        if (unit(rng) * peak <= std::pow(std::sin(0.5 * theta), 2)) break;
    }
    return UnitQuaternion::from_axis_angle(axis, theta).canonical();
}

Environment::Environment(SpacecraftModel model, EpisodeConfig config,
                         std::unique_ptr<ControlAllocator> allocator)
    : model_(std::move(model)),
      config_(std::move(config)),
      allocator_(allocator ? std::move(allocator) : std::make_unique<IdentityAllocator>()),
      array_(WheelArray::make(model_.wheels)) {
    config_.validate();
    try {
        config_.fault_schedule.validate_for(array_.size());
    } catch (const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    state_.wheel_speeds = VecX::Zero(array_.size());
}

Environment::Environment(const Environment &other)
    : model_(other.model_),
      config_(other.config_),
      allocator_(other.allocator_->clone()),
      array_(other.array_),
      state_(other.state_),
      goal_(other.goal_),
      e_prev_(other.e_prev_),
      t_start_(other.t_start_),
      step_count_(other.step_count_),
      active_(other.active_) {}

Environment &Environment::operator=(const Environment &other) {
    if (this != &other) {
        Environment tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

std::pair<Observation, Goal> Environment::reset(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SpacecraftState s;
    s.attitude = mrp_from_quat(sample_attitude(rng, config_.initial_angle_max));
    std::uniform_real_distribution<double> rate(-config_.initial_omega_max,
                                                config_.initial_omega_max);
    for (int i = 0; i < 3; ++i) {
        s.omega[i] = config_.initial_omega_max > 0.0 ? rate(rng) : 0.0;
    }
    Goal g;
    if (config_.random_goal) {
        g.sigma_target = mrp_from_quat(sample_attitude(rng, config_.goal_angle_max));
    }
    const Observation obs = reset_to(s, g);
    return {obs, g};
}

Observation Environment::reset_to(const SpacecraftState &initial, const Goal &goal) {
    array_ = WheelArray::make(model_.wheels);
    allocator_->reset();
    state_ = initial;
    state_.attitude = mrp_canonical(initial.attitude);
    if (state_.wheel_speeds.size() != array_.size()) {
        state_.wheel_speeds = VecX::Zero(array_.size());
    }
    goal_ = goal;
    t_start_ = state_.t;
    step_count_ = 0;
    active_ = true;
    e_prev_ = mrp_error(state_.attitude, goal_.sigma_target).norm();
    return observation();
}

Observation Environment::observation() const {
    return make_observation(state_.attitude, state_.omega, goal_);
}

StepOutcome Environment::step(const Action &action) {
    if (!active_) {
        throw std::logic_error("Environment::step called on a finished or unstarted episode");
    }
    const Vec4 channel = action.clamped().a * model_.wheels.torque_max;
    const double dt = config_.internal_dt();
    const int n = array_.size();

    StepOutcome out;
    out.tau_cmd = VecX::Zero(n);
    out.tau_applied = VecX::Zero(n);
    const AttitudeMRP sigma_prev = state_.attitude;
    try {
        for (int k = 0; k < config_.substeps; ++k) {
            config_.fault_schedule.apply(array_, state_.t - t_start_);
            const VecX cmd = allocator_->allocate(channel, array_, model_.wheels);
            StepResult r = rwctl::step(state_, cmd, dt, model_, array_);
            out.tau_cmd += cmd;
            out.tau_applied += r.applied;
            state_ = std::move(r.state);
        }
    } catch (const SimulationDiverged &) {
        active_ = false;
        throw;
    }
    out.tau_cmd /= config_.substeps;
    out.tau_applied /= config_.substeps;
    out.fault_flags = array_.fault_flags;

    ++step_count_;
    out.next = observation();
    const double e_curr = out.next.mrp_error.norm();
    const double omega_norm = state_.omega.norm();
    out.reward = reward_fn(e_prev_, e_curr, omega_norm, config_.reward);
    out.info = TransitionInfo{sigma_prev, state_.attitude, e_prev_, e_curr, omega_norm};
    e_prev_ = e_curr;
    out.done = step_count_ >= config_.n_steps;
    if (out.done) {
        active_ = false;
    }
    return out;
}

}  // namespace rwctl
