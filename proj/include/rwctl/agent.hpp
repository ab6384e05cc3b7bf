// Twin-critic delayed deterministic policy gradient with hindsight relabeling
// and per-wheel clipping of the action gradient
#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "rwctl/dense_net.hpp"
#include "rwctl/environment.hpp"
#include "rwctl/replay_buffer.hpp"

namespace rwctl {

using NetScalar = float;
using Net = DenseNet<NetScalar>;
using NetMatrix = Net::Matrix;
using NetVector = Net::Vector;

enum class HerStrategy { Future };

struct AgentConfig {
    double gamma = 0.99;
    int batch_size = 128;
    int policy_delay = 2;
    double polyak = 0.005;
    double exploration_noise_std = 0.1;
    double target_noise_std = 0.2;
    double target_noise_clip = 0.5;
    double dwc_threshold = 0.2;
    bool dwc_adaptive = false;
    int dwc_window = 1000;
    int her_k = 4;
    HerStrategy her_strategy = HerStrategy::Future;
    double alpha_is = 1.0;
    bool her_enabled = true;
    bool dwc_enabled = true;
    double learning_rate = 3e-4;
    std::vector<int> hidden = {256, 256};
    std::size_t buffer_capacity = 1'000'000;
    double actor_last_layer_scale = 1e-3;
    /// Project actions onto the torque directions the wheel geometry can
    /// realize, removing the component that only spins wheels against each other.
    bool project_actions = true;

    /// "td3-hd", "td3", "td3-her" or "td3-dwc" from the ablation flags.
    [[nodiscard]] std::string variant() const;
    /// Throws ConfigError.
    void validate() const;
};

/// Online networks, their targets, and one optimizer per online network.
struct ActorCritic {
    Net actor;
    Net critic1;
    Net critic2;
    Net actor_target;
    Net critic1_target;
    Net critic2_target;
    AdamState<NetScalar> actor_opt;
    AdamState<NetScalar> critic1_opt;
    AdamState<NetScalar> critic2_opt;

    static ActorCritic create(const AgentConfig &cfg, std::mt19937_64 &rng);
};

/// Minibatch in network layout, one sample per column.
struct Batch {
    NetMatrix obs;       // 6 x B
    NetMatrix action;    // 4 x B
    NetVector reward;    // B
    NetMatrix next_obs;  // 6 x B
    NetVector done;      // B, 1 for terminal
    NetVector weight;    // B, importance weights

    [[nodiscard]] int size() const { return static_cast<int>(reward.size()); }
};

/// r + gamma (1 - done) min(q1, q2).
template <typename T>
T td_target(T reward, T gamma, bool done, T q1_next, T q2_next) {
    return reward + (done ? T(0) : gamma * (q1_next < q2_next ? q1_next : q2_next));
}

struct CriticUpdateResult {
    double loss1 = 0.0;
    double loss2 = 0.0;
    NetVector target;       // regression targets y
    NetVector q1_next;      // target critic 1 at (s', a~)
    NetVector q2_next;      // target critic 2 at (s', a~)
};

struct ActorUpdateResult {
    double loss = 0.0;
    NetMatrix grad_pre;   // dQ1/da before clipping, 4 x B
    NetMatrix grad_post;  // after clipping
    Vec4 thresholds = Vec4::Zero();  // c_i used (0 when clipping is off)
};

/// Running summary of every actor update's clipped action gradients.
struct DwcLog {
    std::uint64_t updates = 0;
    std::uint64_t components = 0;
    std::uint64_t clipped_components = 0;
    /// Components with |g| <= c whose post-clip value differs from pre-clip.
    std::uint64_t unsaturated_changed = 0;
    /// Post-clip components outside [-c_i, c_i].
    std::uint64_t out_of_bounds = 0;
    double max_abs_post = 0.0;
    double max_abs_pre = 0.0;
};

struct UpdateStats {
    CriticUpdateResult critic;
    bool actor_updated = false;
    double actor_loss = 0.0;
};

class Td3HdAgent {
public:
    /// Importance ratio of a stored transition; the weight is ratio^alpha_is.
    using ImportanceRatioFn = std::function<double(const Transition &)>;

    Td3HdAgent(AgentConfig cfg, std::uint64_t seed);

    /// Deterministic policy output, plus clamped Gaussian noise when exploring.
    Action select_action(const Observation &obs, bool explore);
    [[nodiscard]] Action policy(const Observation &obs) const;

    [[nodiscard]] Batch make_batch(const ReplayBuffer &buffer,
                                   const std::vector<std::size_t> &indices) const;

    CriticUpdateResult critic_update(const Batch &batch);
    ActorUpdateResult actor_update_dwc(const Batch &batch);
    /// Moves all three targets toward the online networks by `tau`.
    void polyak_update(double tau);

    /// One critic step, plus actor and target steps every policy_delay calls.
    /// Throws std::invalid_argument when the buffer holds < batch_size entries.
    UpdateStats update(const ReplayBuffer &buffer);

    /// Linear map applied to every actor output (and its noise) before use.
    /// Identity by default; see action_projection().
    void set_action_projection(const Eigen::Matrix4d &P);
    [[nodiscard]] const Eigen::Matrix4d &action_projection() const { return projection_; }

    [[nodiscard]] double is_weight(const Transition &tr) const;
    void set_importance_ratio(ImportanceRatioFn fn) { importance_ratio_ = std::move(fn); }

    /// Clips each action-gradient component to [-c_i, c_i].
    [[nodiscard]] static NetMatrix clip_dimension_wise(const NetMatrix &grad, const Vec4 &c);

    [[nodiscard]] const AgentConfig &config() const { return cfg_; }
    [[nodiscard]] const ActorCritic &networks() const { return nets_; }
    ActorCritic &mutable_networks() { return nets_; }
    [[nodiscard]] std::uint64_t critic_updates() const { return critic_updates_; }
    [[nodiscard]] std::uint64_t actor_updates() const { return actor_updates_; }
    void set_update_counters(std::uint64_t critic, std::uint64_t actor);
    [[nodiscard]] const DwcLog &dwc_log() const { return dwc_log_; }
    std::mt19937_64 &rng() { return rng_; }

private:
    Vec4 dwc_thresholds(const NetMatrix &grad);

    AgentConfig cfg_;
    std::mt19937_64 rng_;
    ActorCritic nets_;
    std::uint64_t critic_updates_ = 0;
    std::uint64_t actor_updates_ = 0;
    ImportanceRatioFn importance_ratio_;
    Eigen::Matrix4d projection_ = Eigen::Matrix4d::Identity();
    NetMatrix projection_net_ = NetMatrix::Identity(kActionDim, kActionDim);
    bool projected_ = false;
    DwcLog dwc_log_;
    // Per-update sums for the adaptive thresholds: {sum, sum of squares, count}.
    std::deque<std::array<Vec4, 2>> grad_window_;
    std::deque<double> grad_window_count_;
};

/// Orthogonal projector G^+ G onto the row space of a 3 x 4 geometry.
Eigen::Matrix4d action_projection(const Eigen::Matrix<double, 3, 4> &geometry);

/// Stores an episode, plus `her_k` relabeled copies of each transition with
/// goals drawn uniformly from the attitudes reached later in the episode.
/// Returns the number of transitions added.
std::size_t her_store(const std::vector<Transition> &episode, ReplayBuffer &buffer,
                      const AgentConfig &cfg, const RewardConfig &reward_cfg,
                      std::mt19937_64 &rng);

}  // namespace rwctl
