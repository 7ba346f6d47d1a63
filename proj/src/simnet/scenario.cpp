#include "rpoa/simnet/scenario.hpp"

#include <cmath>
#include <set>

namespace rpoa::simnet {

const char* to_string(ExperimentKind kind)
{
    switch (kind) {
    case ExperimentKind::run: return "run";
    case ExperimentKind::attack: return "attack";
    case ExperimentKind::sybil: return "sybil";
    case ExperimentKind::theorem1: return "theorem1";
    case ExperimentKind::retarget: return "retarget";
    }
    return "unknown";
}

const char* to_string(MiningMode mode)
{
    return mode == MiningMode::analytic ? "analytic" : "real_hash";
}

const char* to_string(Behavior behavior)
{
    switch (behavior) {
    case Behavior::honest: return "honest";
    case Behavior::withhold_and_overtake: return "withhold-and-overtake";
    case Behavior::sybil_cluster: return "sybil-cluster";
    }
    return "unknown";
}

std::optional<ExperimentKind> parse_experiment_kind(std::string_view s)
{
    for (auto k : {ExperimentKind::run, ExperimentKind::attack, ExperimentKind::sybil, ExperimentKind::theorem1,
                   ExperimentKind::retarget}) {
        if (s == to_string(k))
            return k;
    }
    return std::nullopt;
}

std::optional<MiningMode> parse_mining_mode(std::string_view s)
{
    if (s == "analytic")
        return MiningMode::analytic;
    if (s == "real_hash")
        return MiningMode::real_hash;
    return std::nullopt;
}

std::optional<Behavior> parse_behavior(std::string_view s)
{
    for (auto b : {Behavior::honest, Behavior::withhold_and_overtake, Behavior::sybil_cluster}) {
        if (s == to_string(b))
            return b;
    }
    return std::nullopt;
}

std::vector<Theorem1Cell> default_theorem1_grid()
{
    std::vector<Theorem1Cell> grid;
    for (double n_b : {1000.0, 2000.0, 4000.0, 8000.0, 16000.0})
        grid.push_back({1000.0, n_b, 10.0, 100.0});
    return grid;
}

std::vector<ActivityVariant> default_activity_variants()
{
    return {{50.0, 2.0, 10.0}, {100000.0, 0.5, 1000.0}};
}

std::vector<MinerAgent> default_roster()
{
    std::vector<MinerAgent> roster;
    for (int i = 0; i < 3; ++i) {
        MinerAgent m;
        m.id = "m" + std::to_string(i);
        roster.push_back(m);
    }
    return roster;
}

namespace {

void require(bool ok, const std::string& field, const std::string& message)
{
    if (!ok)
        throw ScenarioError(field, message);
}

bool finite_positive(double v) { return std::isfinite(v) && v > 0.0; }
bool finite_non_negative(double v) { return std::isfinite(v) && v >= 0.0; }

void validate_service(const ServicePolicy& s, const std::string& path)
{
    require(finite_non_negative(s.rate), path + ".rate", "must be a finite non-negative number");
    require(finite_non_negative(s.worth_min), path + ".worth_min", "must be a finite non-negative number");
    require(finite_non_negative(s.worth_max) && s.worth_max >= s.worth_min, path + ".worth_max",
            "must be finite and at least worth_min");
    require(finite_non_negative(s.period_worth), path + ".period_worth", "must be a finite non-negative number");
    require(finite_non_negative(s.miner_wage), path + ".miner_wage", "must be a finite non-negative number");
    for (std::size_t i = 0; i < s.script.size(); ++i) {
        const std::string p = path + ".script[" + std::to_string(i) + "]";
        require(s.script[i].height >= 1, p + ".height", "must be at least 1");
        require(finite_non_negative(s.script[i].worth), p + ".worth", "must be a finite non-negative number");
    }
}

} // namespace

void Scenario::validate() const
{
    require(duration_blocks > 0, "duration_blocks", "must be positive");

    require(chain.hash_bits_beta >= 64 && chain.hash_bits_beta <= 256, "chain.hash_bits_beta",
            "must be within [64, 256]");
    require(finite_positive(chain.target_interval_CT), "chain.target_interval_CT", "must be a positive number of seconds");
    require(chain.retarget_window_W >= 1, "chain.retarget_window_W", "must be at least 1");

    require(finite_positive(activity.time_scale_T), "activity.time_scale_T", "must be positive");
    require(finite_positive(activity.decay_exponent_r), "activity.decay_exponent_r", "must be positive");
    require(finite_positive(activity.worth_cap_chi), "activity.worth_cap_chi", "must be positive");
    require(finite_positive(activity.worth_scale_L), "activity.worth_scale_L", "must be positive");
    require(finite_positive(activity.activity_scale_alpha), "activity.activity_scale_alpha", "must be positive");

    require(finite_positive(fees.entrance_base_gamma_e), "fees.entrance_base_gamma_e", "must be positive");
    require(finite_positive(fees.service_base_alpha_fee), "fees.service_base_alpha_fee", "must be positive");
    require(finite_positive(fees.max_block_worth_omega_w), "fees.max_block_worth_omega_w", "must be positive");
    require(finite_positive(fees.upload_base_gamma_u), "fees.upload_base_gamma_u", "must be positive");
    require(fees.stake_lock_blocks >= 1, "fees.stake_lock_blocks", "must be positive");
    require(finite_non_negative(fees.block_reward), "fees.block_reward", "must be non-negative");

    if (kind != ExperimentKind::theorem1) {
        require(!miners.empty(), "miners", "roster must not be empty");
        std::set<AccountId> ids;
        double total_rate = 0.0;
        std::size_t adversaries = 0;
        for (std::size_t i = 0; i < miners.size(); ++i) {
            const auto& m = miners[i];
            const std::string p = "miners[" + std::to_string(i) + "]";
            require(!m.id.empty() && m.id.front() != '<', p + ".id", "must be non-empty and not start with '<'");
            require(ids.insert(m.id).second, p + ".id", "duplicate miner id '" + m.id + "'");
            require(finite_non_negative(m.hash_rate_g), p + ".hash_rate_g", "must be a finite non-negative number");
            require(finite_non_negative(m.initial_balance), p + ".initial_balance", "must be non-negative");
            validate_service(m.service, p + ".service_policy");
            total_rate += m.hash_rate_g;
            if (m.behavior == Behavior::withhold_and_overtake)
                ++adversaries;
        }
        require(total_rate > 0.0, "miners", "at least one miner needs a positive hash rate");
        require(adversaries <= 1, "miners", "at most one withhold-and-overtake miner is supported");
    }

    if (hash_rate_step) {
        require(hash_rate_step->height >= 1, "hash_rate_step.height", "must be at least 1");
        require(finite_positive(hash_rate_step->factor), "hash_rate_step.factor", "must be positive");
    }

    switch (kind) {
    case ExperimentKind::run:
        break;
    case ExperimentKind::attack:
        require(attack.adversary_share > 0.0 && attack.adversary_share <= 1.0, "experiment.adversary_share",
                "must be within (0, 1]");
        require(attack.depth >= 1, "experiment.depth", "must be at least 1");
        require(attack.budget >= 1, "experiment.budget", "must be at least 1");
        require(attack.runs >= 1, "experiment.runs", "must be at least 1");
        require(attack.warmup_blocks >= attack.depth, "experiment.warmup_blocks", "must be at least depth");
        break;
    case ExperimentKind::sybil:
        require(sybil.sybil_count >= 1, "experiment.sybil_count", "must be at least 1");
        require(finite_non_negative(sybil.service_worth), "experiment.service_worth", "must be non-negative");
        require(2.0 * sybil.service_worth <= fees.max_block_worth_omega_w, "experiment.service_worth",
                "both sides' per-period worth must fit under fees.max_block_worth_omega_w");
        require(finite_positive(sybil.identity_balance), "experiment.identity_balance", "must be positive");
        break;
    case ExperimentKind::theorem1: {
        require(theorem1.samples >= 1, "experiment.samples", "must be at least 1");
        require(finite_positive(theorem1.service_fraction_c), "experiment.service_fraction_c", "must be positive");
        require(finite_non_negative(theorem1.zeta_sd_ratio), "experiment.zeta_sd_ratio", "must be non-negative");
        require(finite_positive(theorem1.sup_worth), "experiment.sup_worth", "must be positive");
        std::set<double> nus;
        for (std::size_t i = 0; i < theorem1.grid.size(); ++i) {
            const auto& c = theorem1.grid[i];
            require(finite_positive(c.n_u) && finite_positive(c.n_b) && finite_positive(c.n_m)
                        && finite_positive(c.gamma),
                    "experiment.grid[" + std::to_string(i) + "]", "all of n_u, n_b, n_m, gamma must be positive");
            nus.insert(c.nu());
        }
        require(nus.size() >= 4, "experiment.grid", "degenerate grid: needs at least 4 distinct n_b/n_u values");
        for (std::size_t i = 0; i < theorem1.variants.size(); ++i) {
            const auto& v = theorem1.variants[i];
            require(finite_positive(v.time_scale_T) && finite_positive(v.decay_exponent_r)
                        && finite_positive(v.worth_scale_L),
                    "experiment.variants[" + std::to_string(i) + "]", "T, r and L must be positive");
        }
        break;
    }
    case ExperimentKind::retarget:
        require(!retarget.windows.empty(), "experiment.windows", "must list at least one window");
        for (auto w : retarget.windows)
            require(w >= 1, "experiment.windows", "every window must be at least 1");
        require(retarget.runs >= 1, "experiment.runs", "must be at least 1");
        require(retarget.trailing >= 1, "experiment.trailing", "must be at least 1");
        require(retarget.settle_height >= retarget.trailing, "experiment.settle_height", "must be at least trailing");
        require(duration_blocks > retarget.settle_height, "duration_blocks", "must exceed experiment.settle_height");
        require(finite_positive(retarget.tolerance), "experiment.tolerance", "must be positive");
        break;
    }
}

} // namespace rpoa::simnet
