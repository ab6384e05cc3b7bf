// Run configuration: YAML schema, defaults, overrides and hashing
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "rwctl/baselines.hpp"
#include "rwctl/redistribution.hpp"
#include "rwctl/trainer.hpp"

namespace rwctl {

/// The long evaluation rollout. Runs as one continuous episode, no resets.
struct ScenarioConfig {
    SpacecraftModel model;
    double duration = 8000.0;  // s
    /// Absolute times, s.
    FaultSchedule faults = FaultSchedule({{0, 3000.0}});
    double initial_angle_max = 60.0 * kPi / 180.0;  // rad
    double initial_omega_max = 0.0;                 // rad/s, per component
    Vec3 goal = Vec3::Zero();                       // target attitude, MRP
    /// Backup-wheel switching for the learned controllers' allocation.
    BackupPolicy backup = BackupPolicy::Never;
    int backup_saturation_steps = 5;

    /// Control steps in the rollout.
    [[nodiscard]] int steps(double control_dt) const;
    /// Earliest scheduled fault, if any.
    [[nodiscard]] std::optional<double> first_fault() const;
};

enum class AgentKind { Pd, Td3, Td3Hd };

AgentKind parse_agent_kind(const std::string &s);
std::string to_string(AgentKind k);

struct AgentSection {
    AgentKind kind = AgentKind::Td3Hd;
    AgentConfig td3;
    PDGains pd;

    /// Sets `kind` and the matching ablation flags (td3 turns HER and
    /// clipping off, td3-hd turns both on).
    void set_kind(AgentKind k);
    /// "pd", or the learned variant from the ablation flags.
    [[nodiscard]] std::string variant() const;
};

struct RunConfig {
    ScenarioConfig scenario;
    EpisodeConfig environment = default_training_episode();
    AgentSection agent;
    TrainingConfig training;
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    std::string output_dir = "runs";

    /// Training episodes: 100 steps of 1 s, wheel 0 lost 50 s in.
    static EpisodeConfig default_training_episode();

    /// Throws ConfigError.
    void validate() const;
};

/// Parses YAML text over the defaults. Unknown keys, wrong types and invalid
/// values raise ConfigError carrying the 1-based source line.
RunConfig parse_config(const std::string &yaml_text);
RunConfig load_config(const std::string &path);

/// Complete YAML rendering; parse_config(to_yaml(c)) reproduces c.
std::string to_yaml(const RunConfig &cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(const std::string &bytes);

/// Hash of every agent setting; checkpoints are tied to it.
std::uint64_t agent_config_hash(const AgentConfig &cfg);

/// Command-line values that take precedence over the file.
struct Overrides {
    std::optional<std::string> agent;
    bool no_her = false;
    bool no_dwc = false;
    std::optional<double> fault_time;
    std::optional<double> duration;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
};

/// `fault_time` moves every scheduled fault of the scenario to that time
/// (wheel 0 when none is scheduled). Throws ConfigError.
void apply_overrides(RunConfig &cfg, const Overrides &o);

}  // namespace rwctl
