#include "rpoa/activity.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace rpoa::activity {

namespace {

void require_positive(double v, const char* name)
{
    if (!(v > 0.0) || !std::isfinite(v))
        throw std::invalid_argument(std::string("activity parameter ") + name + " must be a finite positive number");
}

double tf_unchecked(double p, const ActivityParams& params)
{
    const double ratio = params.time_scale_T / (p + params.time_scale_T);
    return params.decay_exponent_r == 1.0 ? ratio : std::pow(ratio, params.decay_exponent_r);
}

double wf_unchecked(double w, const ActivityParams& params)
{
    return -params.worth_scale_L / (w + params.worth_scale_L / params.worth_cap_chi) + params.worth_cap_chi;
}

} // namespace

void ActivityParams::validate() const
{
    require_positive(time_scale_T, "time_scale_T");
    require_positive(decay_exponent_r, "decay_exponent_r");
    require_positive(worth_cap_chi, "worth_cap_chi");
    require_positive(worth_scale_L, "worth_scale_L");
    require_positive(activity_scale_alpha, "activity_scale_alpha");
}

double time_factor(double p, const ActivityParams& params)
{
    params.validate();
    if (!(p >= 0.0))
        throw std::invalid_argument("elapsed period must be non-negative");
    return tf_unchecked(p, params);
}

double worth_factor(double w, const ActivityParams& params)
{
    params.validate();
    if (!(w >= 0.0))
        throw std::invalid_argument("worth must be non-negative");
    if (w == 0.0)
        return 0.0;
    return wf_unchecked(w, params);
}

double tx_activity(double p, double w, const ActivityParams& params)
{
    return params.activity_scale_alpha * time_factor(p, params) * worth_factor(w, params);
}

double max_tx_activity(const ActivityParams& params)
{
    params.validate();
    return params.activity_scale_alpha * params.worth_cap_chi;
}

double total_activity(std::span<const ServiceRecord> history, Height current_height, const ActivityParams& params)
{
    params.validate();
    double sum = 0.0;
    for (const auto& rec : history) {
        if (rec.inclusion_height > current_height)
            throw std::invalid_argument("service record from height " + std::to_string(rec.inclusion_height)
                                        + " is ahead of current height " + std::to_string(current_height));
        if (!(rec.worth_w >= 0.0))
            throw std::invalid_argument("service record worth must be non-negative");
        if (rec.worth_w == 0.0)
            continue;
        const auto p = static_cast<double>(current_height - rec.inclusion_height);
        sum += params.activity_scale_alpha * tf_unchecked(p, params) * wf_unchecked(rec.worth_w, params);
    }
    return 1.0 + sum;
}

} // namespace rpoa::activity
