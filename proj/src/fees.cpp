#include "rpoa/fees.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rpoa::fees {

void FeeSchedule::validate() const
{
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(std::string("fee parameter ") + name + " must be a finite positive number");
    };
    positive(entrance_base_gamma_e, "entrance_base_gamma_e");
    positive(service_base_alpha_fee, "service_base_alpha_fee");
    positive(max_block_worth_omega_w, "max_block_worth_omega_w");
    positive(upload_base_gamma_u, "upload_base_gamma_u");
    if (stake_lock_blocks == 0)
        throw std::invalid_argument("fee parameter stake_lock_blocks must be positive");
    if (!(block_reward >= 0.0) || !std::isfinite(block_reward))
        throw std::invalid_argument("fee parameter block_reward must be finite and non-negative");
}

double entrance_fee(std::int64_t height, const FeeSchedule& sched)
{
    sched.validate();
    if (height < 0)
        throw std::invalid_argument("height must be non-negative");
    return sched.entrance_base_gamma_e * std::sqrt(static_cast<double>(height));
}

double base_service_fee(double w, const FeeSchedule& sched)
{
    sched.validate();
    if (!(w >= 0.0))
        throw std::invalid_argument("worth must be non-negative");
    if (w > sched.max_block_worth_omega_w)
        throw std::invalid_argument("worth exceeds the per-block worth cap");
    return sched.service_base_alpha_fee * w / sched.max_block_worth_omega_w;
}

double upload_fee(double w, double psi, const FeeSchedule& sched)
{
    if (!(psi >= 1.0) || !std::isfinite(psi))
        throw std::invalid_argument("activity must be at least 1");
    return sched.upload_base_gamma_u * base_service_fee(w, sched) * psi;
}

} // namespace rpoa::fees
