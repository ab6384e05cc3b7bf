// Goal-conditioned attitude-control episodes over the spacecraft dynamics
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "rwctl/attitude.hpp"
#include "rwctl/dynamics.hpp"

namespace rwctl {

using Vec4 = Eigen::Vector4d;
using Vec6 = Eigen::Matrix<double, 6, 1>;

constexpr int kObsDim = 6;
constexpr int kActionDim = 4;

struct Observation {
    Vec3 mrp_error = Vec3::Zero();
    Vec3 omega = Vec3::Zero();

    [[nodiscard]] Vec6 to_vector() const;
};

/// Normalized wheel-torque command in [-1, 1]^4.
struct Action {
    Vec4 a = Vec4::Zero();

    [[nodiscard]] Action clamped() const;
};

struct Goal {
    AttitudeMRP sigma_target;
};

struct RewardConfig {
    double accuracy_threshold = 0.25;  // on |mrp_error|
    double omega_threshold = 1.0;      // on |omega|, rad/s
    double omega_penalty = -10.0;
    double accuracy_bonus = 0.01;
    /// Drop the error-reduction term and keep only penalty + accuracy.
    bool sparse = false;
};

struct RewardTerms {
    double error_reduction = 0.0;
    double rate_penalty = 0.0;
    double accuracy = 0.0;
};

RewardTerms reward_terms(double e_prev, double e_curr, double omega_norm,
                         const RewardConfig &cfg = {});

/// e_prev - e_curr, plus -10 when |omega| > 1, plus +-0.01 around e_curr < 0.25.
double reward_fn(double e_prev, double e_curr, double omega_norm, const RewardConfig &cfg = {});

struct TransitionInfo {
    AttitudeMRP sigma_abs;
    AttitudeMRP sigma_abs_next;
    double e_prev = 0.0;
    double e_curr = 0.0;
    double omega_norm = 0.0;
};

struct Transition {
    Observation obs;
    Action action;
    double reward = 0.0;
    Observation next_obs;
    bool done = false;
    std::optional<TransitionInfo> info;
    Goal goal;
    bool relabeled = false;
};

/// Reward the transition would have received had `new_goal` been the goal.
/// Throws std::invalid_argument when the transition carries no info.
double relabel_reward(const Transition &tr, const Goal &new_goal, const RewardConfig &cfg = {});

/// Observation of an absolute state relative to a goal.
Observation make_observation(const AttitudeMRP &sigma_abs, const Vec3 &omega, const Goal &goal);

/// Absolute attitude reached by a state.
AttitudeMRP achieved_goal(const SpacecraftState &state);

/// Maps the four channel torques onto the wheel array.
class ControlAllocator {
public:
    virtual ~ControlAllocator() = default;
    virtual void reset() {}
    /// May update `array.backup_active`. Returns one commanded torque per wheel.
    virtual VecX allocate(const Vec4 &channel_torques, WheelArray &array,
                          const WheelParams &params) = 0;
    [[nodiscard]] virtual std::unique_ptr<ControlAllocator> clone() const = 0;
};

/// Channel i drives wheel i; a backup wheel, if present, stays idle.
class IdentityAllocator final : public ControlAllocator {
public:
    VecX allocate(const Vec4 &channel_torques, WheelArray &array,
                  const WheelParams &params) override;
    [[nodiscard]] std::unique_ptr<ControlAllocator> clone() const override;
};

struct EpisodeConfig {
    int n_steps = 100;
    double control_dt = 1.0;  // s
    int substeps = 10;
    double initial_angle_max = 120.0 * kPi / 180.0;  // rad
    double initial_omega_max = 0.05;                 // rad/s, per component
    bool random_goal = false;
    double goal_angle_max = kPi;  // used when random_goal
    FaultSchedule fault_schedule;  // episode-relative times
    RewardConfig reward;

    [[nodiscard]] double internal_dt() const { return control_dt / substeps; }
    /// Throws ConfigError.
    void validate() const;
};

struct StepOutcome {
    Observation next;
    double reward = 0.0;
    bool done = false;
    TransitionInfo info;
    VecX tau_cmd;      // per wheel, mean over substeps
    VecX tau_applied;  // per wheel, mean over substeps
    std::vector<bool> fault_flags;
};

/// Uniform over rotations whose principal angle is <= angle_max.
UnitQuaternion sample_attitude(std::mt19937_64 &rng, double angle_max);

class Environment {
public:
    Environment(SpacecraftModel model, EpisodeConfig config,
                std::unique_ptr<ControlAllocator> allocator = nullptr);
    Environment(const Environment &other);
    Environment &operator=(const Environment &other);
    Environment(Environment &&) noexcept = default;
    Environment &operator=(Environment &&) noexcept = default;
    ~Environment() = default;

    /// Random initial state per the episode config; deterministic in `seed`.
    std::pair<Observation, Goal> reset(std::uint64_t seed);

    /// Starts an episode from an explicit state (wheel speeds default to rest).
    Observation reset_to(const SpacecraftState &initial, const Goal &goal);

    /// Throws std::logic_error after done, SimulationDiverged on divergence
    /// (the episode is then aborted).
    StepOutcome step(const Action &action);

    [[nodiscard]] const SpacecraftState &state() const { return state_; }
    [[nodiscard]] const WheelArray &wheels() const { return array_; }
    [[nodiscard]] const Goal &goal() const { return goal_; }
    [[nodiscard]] const SpacecraftModel &model() const { return model_; }
    [[nodiscard]] const EpisodeConfig &config() const { return config_; }
    [[nodiscard]] Observation observation() const;
    [[nodiscard]] int steps_taken() const { return step_count_; }
    [[nodiscard]] bool active() const { return active_; }
    /// Episode-relative time of the current state.
    [[nodiscard]] double elapsed() const { return state_.t - t_start_; }

private:
    SpacecraftModel model_;
    EpisodeConfig config_;
    std::unique_ptr<ControlAllocator> allocator_;
    WheelArray array_;
    SpacecraftState state_;
    Goal goal_;
    double e_prev_ = 0.0;
    double t_start_ = 0.0;
    int step_count_ = 0;
    bool active_ = false;
};

}  // namespace rwctl
