#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rpoa/activity.hpp"
#include "rpoa/consensus.hpp"
#include "rpoa/fees.hpp"
#include "rpoa/types.hpp"

namespace rpoa::simnet {

enum class ExperimentKind { run, attack, sybil, theorem1, retarget };
enum class MiningMode { analytic, real_hash };
enum class Behavior { honest, withhold_and_overtake, sybil_cluster };

const char* to_string(ExperimentKind kind);
const char* to_string(MiningMode mode);
const char* to_string(Behavior behavior);
std::optional<ExperimentKind> parse_experiment_kind(std::string_view s);
std::optional<MiningMode> parse_mining_mode(std::string_view s);
std::optional<Behavior> parse_behavior(std::string_view s);

struct ScriptedService {
    Height height = 0;
    double worth = 0.0;

    bool operator==(const ScriptedService&) const = default;
};

/// How an agent issues service transactions. The three sources add up.
struct ServicePolicy {
    double rate = 0.0;                 // expected random service txs per block (Poisson)
    double worth_min = 0.0;            // random worth ~ U[worth_min, worth_max]
    double worth_max = 0.0;
    std::uint64_t period_blocks = 0;   // one tx at heights 1, 1+period, ...; 0 disables
    double period_worth = 0.0;
    std::vector<ScriptedService> script;
    double miner_wage = 0.0;           // coins tipped per service tx

    bool operator==(const ServicePolicy&) const = default;
};

struct MinerAgent {
    AccountId id;
    double hash_rate_g = 1.0e6; // hashes per second
    Behavior behavior = Behavior::honest;
    ServicePolicy service;
    double initial_balance = 1000.0; // coins

    bool operator==(const MinerAgent&) const = default;
};

/// Multiplies every miner's hash rate by `factor` from `height` on.
struct HashRateStep {
    Height height = 0;
    double factor = 1.0;

    bool operator==(const HashRateStep&) const = default;
};

struct AttackKnobs {
    double adversary_share = 0.9;
    std::uint64_t depth = 2;
    std::uint64_t budget = 200;
    std::uint64_t runs = 100;
    std::uint64_t warmup_blocks = 200;

    bool operator==(const AttackKnobs&) const = default;
};

struct SybilKnobs {
    std::uint64_t sybil_count = 5;
    double service_worth = 50.0;      // per-period worth of the single identity; split k ways in the cluster
    std::uint64_t service_period = 10; // 0 disables service transactions
    double identity_balance = 1.0e6;  // coins; split k ways in the cluster

    bool operator==(const SybilKnobs&) const = default;
};

struct Theorem1Cell {
    double n_u = 1000.0; // users
    double n_b = 1000.0; // blocks
    double n_m = 10.0;   // miners
    double gamma = 100.0; // block size

    [[nodiscard]] double nu() const { return n_b / n_u; }
    bool operator==(const Theorem1Cell&) const = default;
};

/// Replacement (T, r, L) for one slope-invariance series; alpha and chi stay fixed.
struct ActivityVariant {
    double time_scale_T = 1000.0;
    double decay_exponent_r = 1.0;
    double worth_scale_L = 100.0;

    bool operator==(const ActivityVariant&) const = default;
};

std::vector<Theorem1Cell> default_theorem1_grid();
std::vector<ActivityVariant> default_activity_variants();

struct Theorem1Knobs {
    std::vector<Theorem1Cell> grid = default_theorem1_grid();
    std::uint64_t samples = 100000;
    double service_fraction_c = 0.5;
    double zeta_sd_ratio = 0.25; // std-dev of the per-user count as a fraction of its mean
    std::vector<ActivityVariant> variants = default_activity_variants();
    double sup_worth = 1.0e12;

    bool operator==(const Theorem1Knobs&) const = default;
};

struct RetargetKnobs {
    std::vector<std::uint32_t> windows{20};
    std::uint64_t runs = 128;
    std::uint64_t trailing = 100;
    Height settle_height = 200;
    double tolerance = 0.10;
    Height reconverge_blocks = 150;

    bool operator==(const RetargetKnobs&) const = default;
};

std::vector<MinerAgent> default_roster();

/// Declarative experiment input. Only the knob block matching `kind` is used.
struct Scenario {
    ExperimentKind kind = ExperimentKind::run;
    std::uint64_t seed = 0;
    Height duration_blocks = 1000;
    MiningMode mining_mode = MiningMode::analytic;
    consensus::ChainParams chain;
    activity::ActivityParams activity;
    fees::FeeSchedule fees;
    std::vector<MinerAgent> miners = default_roster();
    std::optional<HashRateStep> hash_rate_step;
    AttackKnobs attack;
    SybilKnobs sybil;
    Theorem1Knobs theorem1;
    RetargetKnobs retarget;

    [[nodiscard]] consensus::ProtocolParams protocol() const { return {chain, activity, fees}; }

    /// Throws ScenarioError naming the violated field.
    void validate() const;

    bool operator==(const Scenario&) const = default;
};

/// Semantic scenario error; `field` is the dotted path of the offending setting.
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(std::string field, const std::string& message)
        : std::runtime_error(field + ": " + message), field_(std::move(field))
    {
    }

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace rpoa::simnet
