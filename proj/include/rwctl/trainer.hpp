// Interaction and gradient loop for the learned controller
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rwctl/agent.hpp"

namespace rwctl {

struct TrainingConfig {
    std::uint64_t total_steps = 100'000;  // environment steps
    std::uint64_t warmup_steps = 1'000;   // no gradient updates before this many steps
    std::uint64_t eval_interval = 5'000;
    int eval_episodes = 20;
    std::uint64_t eval_seed_base = 1'000'000;

    /// Throws ConfigError.
    void validate() const;
};

struct EvalStats {
    std::uint64_t step = 0;
    double mean_return = 0.0;
    /// Principal error angle at the start of each step, averaged over every
    /// step of every episode.
    double mean_error_deg = 0.0;
    /// Same, restricted to steps starting at or after the first scheduled
    /// fault (equal to mean_error_deg without faults).
    double mean_error_post_deg = 0.0;
    /// Error angle after the last step, averaged over episodes.
    double mean_final_error_deg = 0.0;
};

struct TrainingReport {
    std::string variant;
    std::uint64_t seed = 0;
    std::vector<EvalStats> evaluations;
    std::uint64_t env_steps = 0;
    std::uint64_t episodes = 0;
    std::uint64_t critic_updates = 0;
    std::uint64_t actor_updates = 0;
    std::uint64_t transitions_stored = 0;
    std::uint64_t aborted_episodes = 0;  // ended early by SimulationDiverged
    bool diverged = false;
    std::string diagnostic;
};

/// splitmix64 finalizer; decorrelates seeds derived from one run seed.
std::uint64_t mix_seed(std::uint64_t x);

using PolicyFn = std::function<Action(const Observation &)>;

/// Runs one episode per seed from `prototype` with a deterministic policy.
EvalStats evaluate_policy(const PolicyFn &policy, const Environment &prototype,
                          const std::vector<std::uint64_t> &seeds);

/// Seeds of the fixed evaluation episodes.
std::vector<std::uint64_t> eval_seeds(const TrainingConfig &cfg);

class Trainer {
public:
    Trainer(AgentConfig agent_cfg, TrainingConfig train_cfg, Environment env, std::uint64_t seed);

    /// Trains to total_steps. A non-finite loss ends the run with
    /// `diverged` set and a diagnostic instead of throwing.
    TrainingReport run(const std::function<void(const EvalStats &)> &on_eval = {});

    [[nodiscard]] Td3HdAgent &agent() { return agent_; }
    [[nodiscard]] const Td3HdAgent &agent() const { return agent_; }
    [[nodiscard]] const ReplayBuffer &buffer() const { return buffer_; }
    [[nodiscard]] const Environment &environment() const { return env_; }

private:
    EvalStats evaluate(std::uint64_t step) const;

    TrainingConfig cfg_;
    Environment env_;
    std::uint64_t seed_;
    Td3HdAgent agent_;
    ReplayBuffer buffer_;
    std::mt19937_64 her_rng_;
};

}  // namespace rwctl
