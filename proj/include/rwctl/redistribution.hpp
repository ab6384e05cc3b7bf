// Fault-aware weighting of the four torque channels over the wheel array
#pragma once

#include <array>
#include <string>
#include <vector>

#include "rwctl/environment.hpp"

namespace rwctl {

/// Per-wheel weights lambda and the wheel each action channel drives.
struct RedistributionWeights {
    VecX lambda;                  // one entry per wheel; 0 for faulted or idle wheels
    std::array<int, 4> channel{};  // channel -> wheel index
    int n_active = 0;

    /// Torque commanded to each wheel: lambda_w * n_active * tau_c for w = channel[c].
    [[nodiscard]] VecX wheel_torques(const Vec4 &channel_torques) const;
};

/// Zeroes the weight of every faulted wheel and renormalizes the rest to sum 1.
///
/// `nominal` holds the weights of the four primary channels. When
/// `backup_available` and a primary wheel is faulted, that wheel's channel is
/// routed to the backup (index 4), which inherits the channel's weight before
/// renormalization. With no faults the result is an exact pass-through.
/// Throws std::runtime_error when no wheel is left to actuate.
RedistributionWeights redistribute(const Vec4 &nominal, const std::vector<bool> &fault_flags,
                                   bool backup_available);

enum class BackupPolicy {
    Never,
    OnFault,
    /// After a fault, once any remaining channel has been saturated for
    /// `saturation_steps` consecutive allocations.
    OnSaturation,
};

BackupPolicy parse_backup_policy(const std::string &s);
std::string to_string(BackupPolicy p);

class RedistributionAllocator final : public ControlAllocator {
public:
    explicit RedistributionAllocator(BackupPolicy policy = BackupPolicy::Never,
                                     int saturation_steps = 5,
                                     Vec4 nominal = Vec4::Constant(0.25));

    void reset() override;
    VecX allocate(const Vec4 &channel_torques, WheelArray &array,
                  const WheelParams &params) override;
    [[nodiscard]] std::unique_ptr<ControlAllocator> clone() const override;

    [[nodiscard]] const RedistributionWeights &last_weights() const { return last_; }

private:
    void update_backup(const Vec4 &channel_torques, WheelArray &array, const WheelParams &params);

    BackupPolicy policy_;
    int saturation_steps_;
    Vec4 nominal_;
    int saturated_run_ = 0;
    RedistributionWeights last_;
};

}  // namespace rwctl
