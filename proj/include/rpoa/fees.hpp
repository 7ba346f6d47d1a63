#pragma once

#include <cstdint>

namespace rpoa::fees {

/// Fee constants. Currency values are in coins.
struct FeeSchedule {
    double entrance_base_gamma_e = 1.0;
    double service_base_alpha_fee = 1.0;
    double max_block_worth_omega_w = 1000.0;
    double upload_base_gamma_u = 2.0;
    std::uint64_t stake_lock_blocks = 100;
    double block_reward = 50.0;

    void validate() const;

    bool operator==(const FeeSchedule&) const = default;
};

/// Entrance-fee stakes stay locked this many times longer than service-fee stakes.
inline constexpr std::uint64_t kEntranceLockMultiplier = 4;

/// gamma_e * sqrt(height)
double entrance_fee(std::int64_t height, const FeeSchedule& sched);

/// alpha_fee * w / omega_w, for 0 <= w <= omega_w.
double base_service_fee(double w, const FeeSchedule& sched);

/// gamma_u * base_service_fee(w) * psi. The payer's activity psi is at least 1.
double upload_fee(double w, double psi, const FeeSchedule& sched);

} // namespace rpoa::fees
