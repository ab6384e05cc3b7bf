// Train, evaluate and compare runs, writing their artifacts to disk
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "rwctl/config.hpp"
#include "rwctl/metrics.hpp"
#include "rwctl/telemetry.hpp"

namespace rwctl {

/// Initial condition of a scenario rollout; a pure function of the seed.
struct ScenarioStart {
    std::uint64_t seed = 0;
    SpacecraftState state;
    Goal goal;
};

ScenarioStart scenario_start(const ScenarioConfig &sc, std::uint64_t seed);

/// One continuous episode spanning the scenario duration. PD drives the
/// wheels channel-for-wheel; the learned agents go through fault-aware
/// redistribution.
Environment make_scenario_env(const RunConfig &cfg, AgentKind kind);

/// Short training episodes with the scenario's spacecraft.
Environment make_training_env(const RunConfig &cfg);

struct Rollout {
    std::vector<TelemetryRecord> records;
    bool diverged = false;
    std::string diagnostic;
};

/// Steps `env` from `start` under `policy` until done or divergence.
Rollout rollout(Environment env, const ScenarioStart &start, const PolicyFn &policy);

/// Agent for `cfg` with the action projection of the scenario's wheel pyramid
/// (when enabled), before any training.
Td3HdAgent make_agent(const RunConfig &cfg, std::uint64_t seed);

struct RunSummary {
    std::string agent;    // pd, td3 or td3-hd
    std::string variant;  // ablation variant
    std::uint64_t seed = 0;
    ScenarioStart start;
    Rollout rollout;
    std::optional<RunMetrics> metrics;  // empty when the rollout diverged
    std::optional<TrainingReport> training;
    std::string directory;
};

using ProgressFn = std::function<void(const std::string &)>;

/// Trains one learned agent and writes checkpoint.rwctl, report.json,
/// telemetry.csv (scenario rollout of the trained policy) and metadata.json
/// into `dir`.
RunSummary train_run(const RunConfig &cfg, std::uint64_t seed, const std::string &dir,
                     const ProgressFn &progress = {});

/// Rolls PD, or a checkpointed agent, over the scenario; writes telemetry.csv
/// and metadata.json into `dir`.
RunSummary eval_run(const RunConfig &cfg, std::uint64_t seed, const std::string &dir,
                    const std::optional<std::string> &checkpoint);

/// Every (agent, seed) in {pd, td3, td3-hd} x cfg.seeds on identical scenario
/// starts. Writes per-run directories under `cfg.output_dir`, plus
/// metrics.csv and metadata.json at its top. `jobs` worker threads.
std::vector<RunSummary> compare_runs(const RunConfig &cfg, int jobs = 1,
                                     const ProgressFn &progress = {});

/// metrics.csv body, one row per run.
std::string metrics_csv(const std::vector<RunSummary> &runs);

}  // namespace rwctl
