#include "rwctl/redistribution.hpp"

#include <cmath>
#include <stdexcept>

#include "rwctl/error.hpp"

namespace rwctl {

VecX RedistributionWeights::wheel_torques(const Vec4 &channel_torques) const {
    VecX out = VecX::Zero(lambda.size());
    for (int c = 0; c < 4; ++c) {
        const int w = channel[static_cast<size_t>(c)];
        out[w] += lambda[w] * n_active * channel_torques[c];
    }
    return out;
}

RedistributionWeights redistribute(const Vec4 &nominal, const std::vector<bool> &fault_flags,
                                   bool backup_available) {
    const int n = static_cast<int>(fault_flags.size());
    if (n < 4) {
        throw std::invalid_argument("redistribute: need at least four wheels");
    }
    RedistributionWeights r;
    r.lambda = VecX::Zero(n);
    r.channel = {0, 1, 2, 3};
    const bool backup_ok = backup_available && n > 4 && !fault_flags[4];
    bool backup_used = false;
    for (int c = 0; c < 4; ++c) {
        if (!fault_flags[static_cast<size_t>(c)]) {
            r.lambda[c] = nominal[c];
        } else if (backup_ok && !backup_used) {
            r.channel[static_cast<size_t>(c)] = 4;
            r.lambda[4] = nominal[c];
            backup_used = true;
        }
    }
    const double total = r.lambda.sum();
    if (!(total > 0.0)) {
        throw std::runtime_error("redistribute: every wheel is faulted and no backup is available");
    }
    r.lambda /= total;
    for (int i = 0; i < n; ++i) {
        if (r.lambda[i] > 0.0) ++r.n_active;
    }
    return r;
}

BackupPolicy parse_backup_policy(const std::string &s) {
    if (s == "never") return BackupPolicy::Never;
    if (s == "on_fault") return BackupPolicy::OnFault;
    if (s == "on_saturation") return BackupPolicy::OnSaturation;
    throw ConfigError("unknown backup policy '" + s + "' (never|on_fault|on_saturation)");
}

std::string to_string(BackupPolicy p) {
    switch (p) {
        case BackupPolicy::Never: return "never";
        case BackupPolicy::OnFault: return "on_fault";
        case BackupPolicy::OnSaturation: return "on_saturation";
    }
    return "never";
}

RedistributionAllocator::RedistributionAllocator(BackupPolicy policy, int saturation_steps,
                                                 Vec4 nominal)
    : policy_(policy), saturation_steps_(saturation_steps), nominal_(nominal) {
    if (saturation_steps < 1) {
        throw std::invalid_argument("saturation_steps must be >= 1");
    }
    if ((nominal.array() < 0.0).any() || !(nominal.sum() > 0.0)) {
        throw std::invalid_argument("nominal channel weights must be >= 0 and not all zero");
    }
}

void RedistributionAllocator::reset() {
    saturated_run_ = 0;
    last_ = {};
}

void RedistributionAllocator::update_backup(const Vec4 &channel_torques, WheelArray &array,
                                            const WheelParams &params) {
    if (!array.has_backup() || array.backup_active || array.fault_flags[4]) {
        return;
    }
    bool any_fault = false;
    for (int i = 0; i < 4; ++i) any_fault = any_fault || array.fault_flags[static_cast<size_t>(i)];
    if (!any_fault || policy_ == BackupPolicy::Never) {
        saturated_run_ = 0;
        return;
    }
    if (policy_ == BackupPolicy::OnFault) {
        array.backup_active = true;
        return;
    }
    const RedistributionWeights w = redistribute(nominal_, array.fault_flags, false);
    const VecX requested = w.wheel_torques(channel_torques);
    bool saturated = false;
    for (int i = 0; i < 4; ++i) {
        if (w.lambda[i] > 0.0 && std::abs(requested[i]) >= params.torque_max * (1.0 - 1e-12)) {
            saturated = true;
        }
    }
    saturated_run_ = saturated ? saturated_run_ + 1 : 0;
    if (saturated_run_ >= saturation_steps_) {
        array.backup_active = true;
    }
}

VecX RedistributionAllocator::allocate(const Vec4 &channel_torques, WheelArray &array,
                                       const WheelParams &params) {
    update_backup(channel_torques, array, params);
    last_ = redistribute(nominal_, array.fault_flags, array.backup_active);
    return last_.wheel_torques(channel_torques);
}

std::unique_ptr<ControlAllocator> RedistributionAllocator::clone() const {
    return std::make_unique<RedistributionAllocator>(*this);
}

}  // namespace rwctl
