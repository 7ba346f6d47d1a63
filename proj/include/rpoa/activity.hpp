#pragma once

#include <span>

#include "rpoa/types.hpp"

namespace rpoa::activity {

/// Constants of the activity function. Elapsed periods are measured in blocks.
struct ActivityParams {
    double time_scale_T = 1000.0;
    double decay_exponent_r = 1.0;
    double worth_cap_chi = 10.0;
    double worth_scale_L = 100.0;
    double activity_scale_alpha = 1.0;

    /// Throws std::invalid_argument naming the first non-positive field.
    void validate() const;

    bool operator==(const ActivityParams&) const = default;
};

/// A service transaction as recorded on chain: its worth and the height it was included at.
struct ServiceRecord {
    double worth_w = 0.0;
    Height inclusion_height = 0;
    AccountId owner;

    bool operator==(const ServiceRecord&) const = default;
};

/// (T / (p + T))^r. Equals 1 at p = 0 and decays towards 0.
double time_factor(double p, const ActivityParams& params);

/// chi - L / (w + L/chi). Equals 0 at w = 0 and saturates towards chi.
double worth_factor(double w, const ActivityParams& params);

/// alpha * TF(p) * WF(w); bounded above by alpha * chi.
double tx_activity(double p, double w, const ActivityParams& params);

/// Supremum of tx_activity, reached at p = 0 as w grows without bound.
double max_tx_activity(const ActivityParams& params);

/// 1 + sum of tx_activity over the history, with each record aged by
/// current_height - inclusion_height. Records from the future are rejected.
double total_activity(std::span<const ServiceRecord> history, Height current_height, const ActivityParams& params);

} // namespace rpoa::activity
