// Binary agent snapshots ("RWCTL1")
#pragma once

#include <cstdint>
#include <string>

#include "rwctl/agent.hpp"

namespace rwctl {

constexpr std::uint32_t kCheckpointVersion = 1;

/// Layout, all little-endian: magic "RWCTL1", u32 version, u64 agent config
/// hash, u64 critic and actor update counts, 16 f64 action projection
/// (column-major), then six networks (actor, critic1, critic2 and their
/// targets), each as u32 layer-size count, i32 sizes, u8 hidden and output
/// activations, u64 parameter count and f64 parameters; then three Adam
/// states (actor, critic1, critic2), each as f64 learning rate, beta1, beta2,
/// epsilon, u64 step, u64 length and f64 first and second moments.
std::string serialize_checkpoint(const Td3HdAgent &agent);

/// Restores networks, optimizers, counters and projection into `agent`.
/// Throws CheckpointError on a bad magic or version, a config hash differing
/// from agent_config_hash(agent.config()), shape mismatches, truncation or
/// trailing bytes. `agent` is unchanged on error.
void deserialize_checkpoint(const std::string &bytes, Td3HdAgent &agent);

void save_checkpoint(const Td3HdAgent &agent, const std::string &path);
void load_checkpoint(const std::string &path, Td3HdAgent &agent);

}  // namespace rwctl
