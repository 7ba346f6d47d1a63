#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "rpoa/ledger.hpp"
#include "rpoa/simnet/scenario.hpp"
#include "rpoa/uint256.hpp"

namespace rpoa::simnet {

struct BlockRecord {
    Height height = 0;
    std::int64_t timestamp_ms = 0;
    AccountId miner;
    double psi_at_mine = 1.0;
    Uint256 threshold;
    std::int64_t interblock_ms = 0;

    bool operator==(const BlockRecord&) const = default;
};

struct MinerStats {
    AccountId id;
    double hash_rate = 0.0;
    std::uint64_t blocks_won = 0;
    Amount entrance_fees_paid = 0;
    Amount upload_fees_paid = 0;
    Amount wages_paid = 0;
    double final_psi = 1.0;
    Amount final_balance = 0;
    Amount final_staked = 0;
    std::vector<double> psi_trajectory; // activity at each mined height

    [[nodiscard]] Amount fees_paid() const { return entrance_fees_paid + upload_fees_paid + wages_paid; }
    bool operator==(const MinerStats&) const = default;
};

/// Normalized g * psi shares at a height.
struct PowerReport {
    Height height = 0;
    std::vector<std::pair<AccountId, double>> shares;

    [[nodiscard]] double total() const;
    [[nodiscard]] double share_of(const AccountId& id) const;
    bool operator==(const PowerReport&) const = default;
};

struct RunMetrics {
    Height chain_length = 0;
    double mean_interblock_s = 0.0;
    double final_eta = 1.0;
    double saturation_fraction = 0.0; // blocks mined at the clamped threshold
    PowerReport final_power;
    Amount total_supply = 0;

    bool operator==(const RunMetrics&) const = default;
};

struct AttackRun {
    std::uint64_t seed = 0;
    bool success = false;
    std::uint64_t blocks_used = 0;
    std::uint64_t adversary_blocks = 0;
    std::uint64_t honest_blocks = 0;
    double adversary_power = 0.0; // power share at the fork point

    bool operator==(const AttackRun&) const = default;
};

struct AttackReport {
    double adversary_share = 0.0;
    std::uint64_t depth = 0;
    std::uint64_t budget = 0;
    std::vector<AttackRun> runs;
    double success_rate = 0.0;
    double reference_probability = 0.0; // biased random walk at the mean measured power

    bool operator==(const AttackReport&) const = default;
};

struct SybilSide {
    std::string label;
    std::vector<AccountId> ids;
    double hash_rate = 0.0;
    std::uint64_t blocks_won = 0;
    Amount entrance_fees = 0;
    Amount upload_fees = 0;
    double weighted_final_psi = 1.0; // hash-rate weighted mean of final activity

    bool operator==(const SybilSide&) const = default;
};

struct SybilReport {
    std::uint64_t sybil_count = 0;
    SybilSide single;
    SybilSide cluster;
    double entrance_fee_ratio = 0.0; // cluster / single; 0 when the single side paid none
    double block_sigma = 0.0;        // binomial sigma of a 50/50 split over the run

    bool operator==(const SybilReport&) const = default;
};

struct RegressionFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;

    bool operator==(const RegressionFit&) const = default;
};

/// Ordinary least squares y = slope * x + intercept. A constant regressor yields
/// slope 0, intercept mean(y), r2 0.
RegressionFit fit_least_squares(std::span<const double> xs, std::span<const double> ys);

struct Theorem1CellResult {
    Theorem1Cell cell;
    double nu = 0.0;
    double mean_zeta = 0.0;          // sample mean of the clamped per-user counts
    double clamp_fraction = 0.0;     // samples that were negative and clamped to 0
    double expected_xi = 0.0;        // mean_zeta * per-transaction activity supremum
    double analytic_xi = 0.0;        // c * n_b * gamma / n_u * alpha * chi

    bool operator==(const Theorem1CellResult&) const = default;
};

struct Theorem1Series {
    activity::ActivityParams activity;
    double xi_sup = 0.0;
    std::vector<Theorem1CellResult> cells;
    RegressionFit fit;

    bool operator==(const Theorem1Series&) const = default;
};

struct Theorem1Report {
    std::vector<Theorem1Series> series; // series[0] uses the scenario's activity params
    double max_slope_deviation = 0.0;   // max |slope_i / slope_0 - 1|
    double clamping_bias = 0.0;         // max relative gap between expected_xi and analytic_xi
    std::optional<double> n_m_residual_slope;

    bool operator==(const Theorem1Report&) const = default;
};

struct RetargetWindowResult {
    std::uint32_t window = 0;
    std::uint64_t runs = 0;
    double steady_mean_interval_s = 0.0;
    double settled_max_deviation = 0.0; // over [settle, step) of the ensemble trailing mean
    bool settled = false;
    std::optional<double> post_step_max_deviation;
    std::optional<Height> reconverged_at;
    bool reconverged = true;
    double single_run_max_deviation = 0.0; // run 0 alone, settle region; informational
    std::vector<double> ensemble_trailing_mean_s; // index = height; 0 before `trailing`

    bool operator==(const RetargetWindowResult&) const = default;
};

struct RetargetReport {
    std::vector<RetargetWindowResult> windows;

    bool operator==(const RetargetReport&) const = default;
};

struct SimResult {
    ExperimentKind kind = ExperimentKind::run;
    Scenario scenario;
    std::vector<BlockRecord> blocks;
    std::vector<MinerStats> miners;
    RunMetrics metrics;
    std::optional<AttackReport> attack;
    std::optional<SybilReport> sybil;
    std::optional<Theorem1Report> theorem1;
    std::optional<RetargetReport> retarget;
    std::vector<std::string> warnings;

    bool operator==(const SimResult&) const = default;
};

/// Runs the protocol loop for `scenario.duration_blocks` blocks.
SimResult run_simulation(const Scenario& scenario);

/// Pi(u) = g(u) psi(u) / sum g psi, with psi evaluated at `height`.
PowerReport compute_power(const ledger::ChainState& state, std::span<const MinerAgent> roster, Height height,
                          const activity::ActivityParams& params);

SimResult run_majority_attack(const Scenario& scenario);

/// Probability that a private fork starting `depth` blocks behind gets strictly
/// ahead within `budget` blocks when each block is the adversary's with probability p.
double attack_reference_probability(double p, std::uint64_t depth, std::uint64_t budget);

SimResult run_sybil_experiment(const Scenario& scenario);

/// Roster the sybil experiment runs: one identity against k identities that split
/// the same hash rate, balance and service worth.
std::vector<MinerAgent> sybil_roster(const Scenario& scenario);

SimResult run_theorem1_experiment(const Scenario& scenario);

/// c * n_b * gamma / n_u * alpha * chi, the closed-form expected activity bound.
double theorem1_analytic_bound(const Theorem1Cell& cell, double service_fraction_c,
                               const activity::ActivityParams& params);

SimResult run_retarget_experiment(const Scenario& scenario);

/// Dispatches on scenario.kind.
SimResult run_experiment(const Scenario& scenario);

} // namespace rpoa::simnet
